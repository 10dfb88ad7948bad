"""Gamified dialect corpus collection platform.

Contributors rewrite standard-language sentences in their dialect, a
character-n-gram classifier guesses the dialect and shows its hexagon
region on a map, and player feedback (confirmations, relabels, new
dialects, region edits) flows back into an append-only corpus store.
An entropy-based selector decides which sentence each player sees next,
at three difficulty tiers.
"""

__version__ = "0.1.0"
