#!/usr/bin/env python3
"""Train the 3x1 differential crossbar on AND and print the truth table.

Runs the device-in-the-loop flow and the software-ideal twin, then shows
per-pattern activations side by side with the final weights.
"""

import numpy as np

from synapsim.neuro import train_and_gate, train_and_gate_software

PATTERNS = ((0, 0), (0, 1), (1, 0), (1, 1))
TARGETS = (0, 0, 0, 1)


def main() -> None:
    dev = train_and_gate()
    sw = train_and_gate_software()
    print(f"device:   {dev.n_correct}/4 correct after {dev.epochs_used} epochs")
    print(f"software: {sw.n_correct}/4 correct after {sw.epochs_used} epochs")
    print("\n a b | target | device act | software act")
    for (a, b), t, ad, asw in zip(PATTERNS, TARGETS, dev.activations,
                                  sw.activations):
        print(f" {a} {b} |   {t}    |   {ad:.4f}   |   {asw:.4f}")
    corr = np.corrcoef(dev.weights.ravel(), sw.weights.ravel())[0, 1]
    print(f"\nweights  device:   {np.array2string(dev.weights.ravel(), precision=4)}")
    print(f"weights  software: {np.array2string(sw.weights.ravel(), precision=4)}")
    print(f"weight correlation: {corr:.4f}")


if __name__ == "__main__":
    main()
