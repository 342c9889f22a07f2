"""Bridge bidding laboratory.

Supervised pretraining on scripted-bidder data, PPO self-play with an opponent
pool over vectorized auctions, double-dummy rewards, and duplicate-match
evaluation in IMPs per board. Deck size is parametric so the full pipeline can
run in minutes on a reduced game.
"""

__version__ = "0.1.0"
