#!/usr/bin/env python3
"""Pre-train the negotiation policy with the default configuration and write
the snapshot plus learning curves (Fig. 8-style data).

Usage: python scripts/pretrain_policy.py [out_dir]
"""

import sys
from pathlib import Path

import numpy as np

from affectnego.policy import TrainConfig, curves_to_csv, pretrain, save_policy
from affectnego.ultimatum import GameConfig


def main() -> None:
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("runs")
    out_dir.mkdir(parents=True, exist_ok=True)
    agent, curves = pretrain(TrainConfig(), GameConfig(), progress=True)
    save_policy(agent, str(out_dir / "policy.json"))
    (out_dir / "learning_curves.csv").write_text(curves_to_csv(curves))
    recent = curves[-100:]
    accepted = [c.accepted_human_share for c in recent if c.accepted_human_share is not None]
    print(f"policy -> {out_dir / 'policy.json'}")
    print(f"trailing-100 mean interactions: {np.mean([c.interactions for c in recent]):.2f}")
    if accepted:
        print(f"trailing-100 mean accepted human share: {np.mean(accepted):.3f}")


if __name__ == "__main__":
    main()
