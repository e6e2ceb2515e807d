#!/usr/bin/env python3
# Copyright (C) 2026 MAPS harness contributors
# SPDX-License-Identifier: Apache-2.0
"""Manual total for the scripted 100-question MAPS run used by the cost
acceptance check. Mirrors the synthetic script in tests/support/fixtures.hpp:
question i first answers correctly at layer i % 5 (4 = never), reply o has
prompt 200 + 37*o + i % 13 and completion 40 + 11*o + i % 7 tokens."""
from decimal import Decimal, ROUND_HALF_UP

RATE_IN = Decimal("0.137")   # USD per 1M input tokens
RATE_OUT = Decimal("0.583")  # USD per 1M output tokens


def calls(i, max_layers):
    first_correct = i % 5
    if first_correct == 0:
        return 1
    layers = min(first_correct, max_layers) if first_correct < 4 else max_layers
    return 1 + 2 * layers


def totals(n, max_layers):
    pin = pout = 0
    for i in range(n):
        for o in range(calls(i, max_layers)):
            pin += 200 + 37 * o + i % 13
            pout += 40 + 11 * o + i % 7
    return pin, pout


if __name__ == "__main__":
    for layers in (3, 1):
        pin, pout = totals(100, layers)
        cost = (Decimal(pin) * RATE_IN + Decimal(pout) * RATE_OUT) / Decimal(1_000_000)
        print(f"MAPS-{layers}L prompt={pin} completion={pout} "
              f"cost={cost:.12f} six={cost.quantize(Decimal('0.000001'), rounding=ROUND_HALF_UP)}")
