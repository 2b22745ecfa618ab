"""Cartan and Jordan projections, and how word balls see them.

Run: python3 demos/01_projections_and_balls.py
"""

import numpy as np

from limitcones import MarkedGroup, cartan_projection, compute_ball, jordan_projection
from limitcones.cartan import opposition_involution, random_sl
from limitcones.words import power_cartan_projection

rng = np.random.default_rng(1)
g = random_sl(4, rng)
while len(set(np.round(jordan_projection(g), 6))) < 4:  # want distinct eigenvalue moduli
    g = random_sl(4, rng)

# mu is the sorted log singular values, lambda the sorted log eigenvalue moduli.
print("mu(g)      ", np.round(cartan_projection(g), 4))
print("lambda(g)  ", np.round(jordan_projection(g), 4))
print("i(mu(g))   ", np.round(opposition_involution(cartan_projection(g)), 4))
print("mu(g^-1)   ", np.round(cartan_projection(np.linalg.inv(g)), 4))

# mu(g^p)/p creeps toward lambda(g), but only at rate 1/p.
for p in (4, 16, 64, 256, 1024):
    err = np.linalg.norm(power_cartan_projection(g, p) / p - jordan_projection(g))
    print(f"p = {p:5d}   |mu(g^p)/p - lambda(g)| = {err:.2e}")

# A Schottky pair in SL(2): the ball of radius N has 2*3^N - 1 elements.
a = np.diag([np.exp(1.5), np.exp(-1.5)])
r = np.array([[1.0, -1.0], [1.0, 1.0]]) / np.sqrt(2)
group = MarkedGroup([a, r @ a @ r.T])
ball = compute_ball(group, 8)
print(f"\nball of radius 8: {len(ball)} elements")
longest = int(np.argmax(ball.mu[:, 0]))
print("largest mu_1 attained by", group.format_word(ball.letters[longest]), f"({ball.mu[longest, 0]:.2f})")
