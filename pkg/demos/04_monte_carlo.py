"""Desk-scale Monte Carlo: word-error curves and channel statistics.

Reproduces the flavor of the full experiments at a small trial budget: the
proposed precoder against the rotation-only one on a 2x2 link (common random
numbers sharpen the comparison), plus the two channel statistics that govern
its behavior: how often decoding is search-free, and how often power
equalization costs the best pair some margin.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from mimo_precode import (
    SimConfig,
    build_profile,
    prepare_context,
    run_nosearch,
    run_wep,
    run_zeta_stats,
)

profile4 = build_profile(4)
snrs = tuple(float(s) for s in range(4, 18, 2))
trials = 20000
seed = 424242

fig, ax = plt.subplots(figsize=(6.5, 4.5))
for kind in ("proposed", "x"):
    ctx = prepare_context(kind, 4, 2, profile=profile4)
    curve = run_wep(SimConfig(2, 2, 4, kind, snrs, trials, seed, worker_hint=2), ctx)
    label = "proposed" if kind == "proposed" else "rotation only"
    ax.semilogy([p.snr_db for p in curve], [max(p.wep, 1e-6) for p in curve],
                marker="o", label=label)
    print(label, [(p.snr_db, p.wep) for p in curve])
ax.set_xlabel("SNR per receive antenna (dB)")
ax.set_ylabel("word error probability")
ax.grid(True, which="both", alpha=0.4)
ax.legend()
fig.tight_layout()
fig.savefig("wep_2x2_4qam.png", dpi=150)
print("wrote wep_2x2_4qam.png")

((_, p_free),) = run_nosearch(2, 2, 4, 10**5, seed, profile=profile4)
print(f"\n2x2, 4-QAM: P(no search needed) = {p_free:.4f} (published: 0.5780)")

zeta_min, p_below = run_zeta_stats(4, 4, 4, 10**5, seed, profile=profile4)
print(f"4x4, 4-QAM: P(equalized constant < best pair) = {p_below:.3f} "
      f"(published: 0.79); sample min ratio = {zeta_min:.3f}")
