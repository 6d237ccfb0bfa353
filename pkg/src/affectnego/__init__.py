"""Personality-driven negotiating agent: a self-organizing affect stack
(growing prototype networks, personality cores, mood fusion) driving a
deterministic-policy-gradient negotiator for the Ultimatum Game."""

__version__ = "0.1.0"
