"""Build the piecewise-optimal angle profiles and inspect their structure.

For one pair of coupled subchannels the precoder has two angles: a rotation
theta and a power split psi.  Maximizing the worst-case received distance
makes theta a step function of the channel angle gamma, while
tan(gamma)^2 tan(psi)^2 stays constant on each step.  This script builds the
profiles for 4- and 16-QAM, prints them as tables, and shows how the
closed-form segment machinery reproduces the numerical search.
"""

import math

from mimo_precode import build_profile, eval_profile, grid_search, save_profile


def show(profile):
    print(f"\n{profile.order}-QAM: {len(profile.segments)} segments")
    print(f"{'gamma range':>22}  {'theta*':>8}  {'tan(g)tan(psi*)':>15}  tied pairs")
    for seg in profile.segments:
        pairs = ", ".join(map(str, seg.pairs))
        print(f"[{seg.gamma_lo:8.4f}, {seg.gamma_hi:8.4f}]  {seg.theta_star:8.4f}"
              f"  {math.sqrt(seg.weight):15.4f}  {pairs}")


profile4 = build_profile(4)
profile16 = build_profile(16)
show(profile4)
show(profile16)

# The first segment always uses only the strong subchannel of the pair
# (psi* = 0): the weak one is too poor to be worth loading, and the symbols
# ride a superposed constellation instead.
gamma = 0.2
theta, psi, delta = eval_profile(profile4, gamma)
print(f"\nat gamma = {gamma}: theta* = {theta:.4f}, psi* = {psi:.4f}, "
      f"worst-case distance^2 = {delta:.5f}")

# Against the raw grid search (0.001 rad steps) the closed form lands on the
# same angles without the sweep.
result = grid_search(gamma, 4)
print(f"grid search finds     theta = {result.theta:.4f}, psi = {result.psi:.4f}, "
      f"distance^2 = {result.delta:.5f}")

save_profile(profile16, "profile_16qam.json")
print("\nwrote profile_16qam.json (lossless float round trip)")
