"""Generate the bundled full-diversity rotation matrices for 4 and 8 dimensions.

Construction: take the maximal real subfield K of the 2^r-th cyclotomic field
(degree n = 2^(r-2)), equip its ring of integers Z[t], t = 2 cos(2 pi / 2^r),
with the trace form  b(x, y) = Tr(a x y) / 2^(r-1)  twisted by the totally
positive element a = 2 - t.  This form is unimodular and isometric to Z^n
(Bayer-Fluckiger / Oggier / Viterbo, "New algebraic constructions of rotated
Z^n-lattice constellations for the Rayleigh fading channel", IEEE Trans. IT
2004), so an LLL pass over the embedded basis produces an orthonormal basis.
The resulting orthogonal matrix rotates Z^n with a guaranteed nonzero product
distance: the coordinate product of any nonzero lattice vector is a nonzero
algebraic norm.

The product distance is not the best known for these dimensions, but full
diversity is what the rotation is used for here.

Run from the repository root:  python3 tools/make_rotation_data.py
"""

import json
import math
import os

import numpy as np


def lll_reduce(basis: np.ndarray, delta: float = 0.99) -> np.ndarray:
    """Plain LLL on the rows of `basis` (float arithmetic, small dims)."""
    b = basis.copy()
    n = b.shape[0]

    def gram_schmidt(b):
        bstar = np.zeros_like(b)
        mu = np.zeros((n, n))
        for i in range(n):
            bstar[i] = b[i]
            for j in range(i):
                mu[i, j] = b[i] @ bstar[j] / (bstar[j] @ bstar[j])
                bstar[i] -= mu[i, j] * bstar[j]
        return bstar, mu

    bstar, mu = gram_schmidt(b)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = round(mu[k, j])
            if q != 0:
                b[k] -= q * b[j]
                bstar, mu = gram_schmidt(b)
        if bstar[k] @ bstar[k] >= (delta - mu[k, k - 1] ** 2) * (bstar[k - 1] @ bstar[k - 1]):
            k += 1
        else:
            b[[k, k - 1]] = b[[k - 1, k]]
            bstar, mu = gram_schmidt(b)
            k = max(k - 1, 1)
    return b


def cyclotomic_rotation(dim: int) -> np.ndarray:
    """Orthogonal rotation of Z^dim from the real cyclotomic construction."""
    r = int(math.log2(dim)) + 2
    m = 2 ** r
    # real embeddings of t = 2 cos(2 pi / m): odd multiples below m/2
    odds = np.arange(1, m // 2, 2)
    t_embed = 2.0 * np.cos(2.0 * np.pi * odds / m)
    alpha = 2.0 - t_embed  # totally positive twist 2 - t
    scale = np.sqrt(alpha / 2 ** (r - 1))
    # embedded power basis {t^i}, rows indexed by basis element
    basis = np.array([scale * t_embed ** i for i in range(dim)])
    reduced = lll_reduce(basis)
    gram = reduced @ reduced.T
    if not np.allclose(gram, np.eye(dim), atol=1e-12):
        raise RuntimeError("LLL did not reach an orthonormal basis")
    return reduced


def product_distance(rot: np.ndarray, radius: int = 2) -> float:
    """Min |prod of coordinates| of rot @ x over small nonzero integer x."""
    dim = rot.shape[0]
    grids = np.meshgrid(*[np.arange(-radius, radius + 1)] * dim, indexing="ij")
    xs = np.stack([g.ravel() for g in grids], axis=1)
    xs = xs[np.any(xs != 0, axis=1)]
    prods = np.abs(np.prod(xs @ rot.T, axis=1))
    return float(prods.min())


def main():
    out_dir = os.path.join(os.path.dirname(__file__), "..", "src", "mimo_precode", "data")
    os.makedirs(out_dir, exist_ok=True)
    for dim in (4, 8):
        rot = cyclotomic_rotation(dim)
        dp = product_distance(rot, radius=2 if dim == 4 else 1)
        doc = {
            "dim": dim,
            "rows": [[float(v) for v in row] for row in rot],
            "source": (
                "Real cyclotomic construction (Bayer-Fluckiger/Oggier/Viterbo 2004): "
                "Z^n-isometric twisted trace form on the ring of integers of the "
                f"maximal real subfield of the {2 ** (int(math.log2(dim)) + 2)}-th "
                "cyclotomic field; orthonormal basis via LLL. Full diversity "
                "guaranteed (coordinate products are algebraic norms); product "
                "distance is not the best known."
            ),
        }
        path = os.path.join(out_dir, f"rotation_{dim}.json")
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
        ortho = np.abs(rot @ rot.T - np.eye(dim)).max()
        print(f"dim {dim}: wrote {path}; orthogonality residual {ortho:.2e}; "
              f"sample product distance {dp:.6g}")


if __name__ == "__main__":
    main()
