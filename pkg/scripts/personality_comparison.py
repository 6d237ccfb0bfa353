#!/usr/bin/env python3
"""Paired-seed comparison of the two studied personalities against the
stochastic respondent (Table 3-style metrics plus effect sizes).

Usage: python scripts/personality_comparison.py <policy.json> [--episodes N] [--seed N]
"""

import argparse

from affectnego.affect import Conditioning, PersonalityConfig, TimePerception
from affectnego.config import HarnessConfig
from affectnego.harness import run_condition
from affectnego.policy import load_policy
from affectnego.stats import hedges_g, mann_whitney_u


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("policy")
    parser.add_argument("--episodes", type=int, default=400)
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()

    agent = load_policy(args.policy)
    cfg = HarnessConfig(seed=args.seed, episodes=args.episodes)
    conditions = [
        PersonalityConfig(),
        PersonalityConfig(TimePerception.PATIENT, Conditioning.EXCITATORY),
        PersonalityConfig(TimePerception.IMPATIENT, Conditioning.INHIBITORY),
    ]
    results = [run_condition(cfg, agent, p) for p in conditions]

    print(f"{'condition':24s} {'success':>8s} {'inter':>12s} {'first':>6s} "
          f"{'accepted':>9s} {'final|rej':>9s} {'>=50%':>6s}")
    for r in results:
        m = r.metrics()
        final_rej = f"{m['mean_final_offer_if_rejected']:.1f}" \
            if m["mean_final_offer_if_rejected"] is not None else "-"
        accepted = f"{m['mean_accepted_offer']:.1f}" \
            if m["mean_accepted_offer"] is not None else "-"
        print(f"{r.label:24s} {m['success_rate']:8.2f} "
              f"{m['mean_interactions']:6.2f}±{m['stderr_interactions']:5.2f} "
              f"{m['mean_first_offer']:6.1f} {accepted:>9s} {final_rej:>9s} "
              f"{m['fraction_offered_geq_50']:6.2f}")

    ph, il = results[1], results[2]
    a = [float(x) for x in ph.interactions]
    b = [float(x) for x in il.interactions]
    mw = mann_whitney_u(a, b, "two-sided")
    print(f"\npatient/excitatory vs impatient/inhibitory interactions: "
          f"U={mw.U:.1f} p={mw.p:.3e} hedges_g={hedges_g(a, b):+.3f}")


if __name__ == "__main__":
    main()
