"""Eigendecomposition of real symmetric arrowhead matrices.

The detector-plus-reservoir generator has the arrowhead form

    H = [[w0, z^T],
         [z,  diag(d)]]

(apex ``w0``, poles ``d``, couplings ``z``).  A dense ``eigh`` costs O(n^3) and
is too slow for the 4000-8000 mode systems the oracle needs on a single core,
so the eigenpairs are obtained from the secular equation

    f(lam) = lam - w0 - sum_j Z_j^2 / (lam - D_j) = 0

after deflating repeated poles and zero couplings.  Each root is stored as an
offset from its nearest pole, which keeps ``lam - D_j`` accurate and the
eigenvectors orthogonal to working precision.

Eigenvectors are never formed densely.  ``project`` (V^T x) and ``apply``
(V c) are evaluated as blocked Cauchy-matrix products.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_BLOCK = 512
_MAX_ITER = 200
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class _DarkBlock:
    """Dark eigenvectors of all degenerate groups sharing one group size."""

    members: np.ndarray  # (G, k) indices into the pole array
    vectors: np.ndarray  # (G, k, r) orthonormal columns, r = k or k - 1
    values: np.ndarray  # (G,) eigenvalue (the common pole)
    offset: int  # position of the first dark coefficient of this block


def _complement_basis(u: np.ndarray) -> np.ndarray:
    """Orthonormal basis (k, k-1) of the complement of unit vector ``u``."""
    k = u.size
    e1 = np.zeros(k)
    e1[0] = 1.0
    sign = 1.0 if u[0] >= 0 else -1.0
    v = sign * u + e1
    house = np.eye(k) - 2.0 * np.outer(v, v) / (v @ v)
    # house maps e1 -> -sign*u; its remaining columns span u's complement.
    return house[:, 1:]


def _group_poles(poles: np.ndarray, tol: float) -> list[np.ndarray]:
    order = np.argsort(poles, kind="stable")
    sorted_poles = poles[order]
    breaks = np.nonzero(np.diff(sorted_poles) > tol)[0] + 1
    return np.split(order, breaks)


class ArrowheadSpectrum:
    """Spectral representation of a real symmetric arrowhead matrix.

    Index 0 of every full-length vector is the apex; index ``i + 1`` is pole
    ``i``.  Eigen-coefficients are ordered bright first (roots of the secular
    equation, ascending), then dark (apex-free eigenvectors of degenerate or
    uncoupled poles).
    """

    def __init__(self, apex: float, poles, couplings, degeneracy_tol: float | None = None):
        poles = np.asarray(poles, dtype=float)
        couplings = np.asarray(couplings, dtype=float)
        if poles.shape != couplings.shape or poles.ndim != 1:
            raise ValueError("poles and couplings must be 1-d arrays of equal length")
        self.apex = float(apex)
        self.poles = poles
        self.couplings = couplings
        self.size = poles.size + 1
        scale = max(1.0, float(np.max(np.abs(poles))) if poles.size else 1.0, abs(self.apex))
        if degeneracy_tol is None:
            degeneracy_tol = 1e-12 * scale
        self._coupling_floor = 1e-14 * max(1.0, float(np.max(np.abs(couplings), initial=0.0)))

        bright_poles, bright_z, group_of = [], [], np.full(poles.size, -1)
        dark_groups: dict[int, list[tuple[np.ndarray, np.ndarray, float]]] = {}
        for members in _group_poles(poles, degeneracy_tol):
            zg = couplings[members]
            norm = float(np.linalg.norm(zg))
            value = float(np.mean(poles[members]))
            if norm <= self._coupling_floor:
                q = np.eye(members.size)
            else:
                group_of[members] = len(bright_poles)
                bright_poles.append(value)
                bright_z.append(norm)
                if members.size == 1:
                    continue
                q = _complement_basis(zg / norm)
            dark_groups.setdefault(members.size, []).append((members, q, value))

        self._bright_poles = np.asarray(bright_poles)
        self._bright_z = np.asarray(bright_z)
        self._group_of = group_of
        self._anchor, self._delta = self._solve_secular()
        if self._bright_poles.size:
            n_bright = self._delta.size
            bright_values = self._bright_poles[self._anchor] + self._delta
        else:
            # Uncoupled apex: it is its own eigenvector.
            n_bright = 1
            bright_values = np.array([self.apex])
        self.n_bright = n_bright

        blocks, offset = [], n_bright
        for k in sorted(dark_groups):
            entries = dark_groups[k]
            members = np.stack([m for m, _, _ in entries])
            vectors = np.stack([q for _, q, _ in entries])
            values = np.array([v for _, _, v in entries])
            blocks.append(_DarkBlock(members, vectors, values, offset))
            offset += members.shape[0] * vectors.shape[2]
        self._dark = blocks
        if offset != self.size:
            raise RuntimeError(f"deflation lost eigenpairs: {offset} != {self.size}")

        dark_values = [np.repeat(b.values, b.vectors.shape[2]) for b in blocks]
        self.eigenvalues = np.concatenate([bright_values, *dark_values]) if dark_values else bright_values
        self.apex_weights = np.zeros(self.size)
        self.apex_weights[:n_bright] = self._bright_norms() if self._bright_poles.size else 1.0

    # ------------------------------------------------------------------
    # secular equation

    def _secular_terms(self, anchor, delta, need_derivative=True):
        """Return (lam - w0, sum Z^2/diff, sum Z^2/diff^2) for a batch of roots."""
        D, Z2 = self._bright_poles, self._bright_z**2
        s1 = np.empty(delta.size)
        s2 = np.empty(delta.size)
        for lo in range(0, delta.size, _BLOCK):
            sl = slice(lo, lo + _BLOCK)
            diff = (D[anchor[sl], None] - D[None, :]) + delta[sl, None]
            inv = 1.0 / diff
            s1[sl] = (Z2 * inv).sum(axis=1)
            if need_derivative:
                s2[sl] = (Z2 * inv * inv).sum(axis=1)
        shift = (D[anchor] - self.apex) + delta
        return shift, s1, s2

    def _solve_secular(self):
        D, Z = self._bright_poles, self._bright_z
        p = D.size
        if p == 0:
            return np.zeros(0, dtype=int), np.zeros(0)
        znorm = float(np.linalg.norm(Z))
        lower = min(self.apex, D[0]) - znorm - 1.0
        upper = max(self.apex, D[-1]) + znorm + 1.0

        anchor = np.empty(p + 1, dtype=int)
        lo = np.empty(p + 1)
        hi = np.empty(p + 1)
        anchor[0], lo[0], hi[0] = 0, lower - D[0], 0.0
        anchor[p], lo[p], hi[p] = p - 1, 0.0, upper - D[-1]
        if p > 1:
            left = np.arange(p - 1)
            gap = D[1:] - D[:-1]
            mid_anchor = left
            mid_delta = 0.5 * gap
            shift, s1, _ = self._secular_terms(mid_anchor, mid_delta, need_derivative=False)
            f_mid = shift - s1
            use_left = f_mid > 0
            anchor[1:p] = np.where(use_left, left, left + 1)
            lo[1:p] = np.where(use_left, 0.0, -0.5 * gap)
            hi[1:p] = np.where(use_left, 0.5 * gap, 0.0)
            # The root sits exactly at the midpoint.
            exact = f_mid == 0
            lo[1:p][exact] = hi[1:p][exact] = np.where(use_left, 0.5 * gap, -0.5 * gap)[exact]

        delta = 0.5 * (lo + hi)
        # End intervals: start near the pole, where the root usually is.
        delta[0] = -min(Z[0], 0.5 * (hi[0] - lo[0]))
        delta[p] = min(Z[-1], 0.5 * (hi[p] - lo[p]))
        active = np.arange(p + 1)
        for _ in range(_MAX_ITER):
            if active.size == 0:
                break
            a, d = anchor[active], delta[active]
            shift, s1, s2 = self._secular_terms(a, d)
            f = shift - s1
            # Tighten brackets using monotonicity of f on each interval.
            neg = f < 0
            lo[active] = np.where(neg, np.maximum(lo[active], d), lo[active])
            hi[active] = np.where(~neg, np.minimum(hi[active], d), hi[active])
            # Newton on q(delta) = delta * f(delta), smooth at the anchor pole.
            q = d * f
            dq = f + d * (1.0 + s2)
            with np.errstate(divide="ignore", invalid="ignore"):
                step = q / dq
            new = d - step
            bad = ~np.isfinite(new) | (new <= lo[active]) | (new >= hi[active])
            new = np.where(bad, 0.5 * (lo[active] + hi[active]), new)
            width = hi[active] - lo[active]
            tol = 4.0 * _EPS * np.maximum(np.abs(new), _EPS * np.abs(D[a]) + 1e-300)
            done = (np.abs(new - d) <= tol) | (width <= tol) | (f == 0)
            delta[active] = np.where(f == 0, d, new)
            active = active[~done]
        else:
            raise RuntimeError("secular equation did not converge")
        return anchor, delta

    def _bright_norms(self):
        _, _, s2 = self._secular_terms(self._anchor, self._delta)
        return 1.0 / np.sqrt(1.0 + s2)

    # ------------------------------------------------------------------
    # Cauchy products

    def _cauchy_rows(self, y):
        """out_n = sum_j y_j / (lam_n - D_j) for every bright root n."""
        D = self._bright_poles
        out = np.empty(self.n_bright, dtype=np.result_type(y, float))
        for lo in range(0, self.n_bright, _BLOCK):
            sl = slice(lo, lo + _BLOCK)
            diff = (D[self._anchor[sl], None] - D[None, :]) + self._delta[sl, None]
            out[sl] = (1.0 / diff) @ y
        return out

    def _cauchy_cols(self, c):
        """out_j = sum_n c_n / (lam_n - D_j) for every bright pole j."""
        D = self._bright_poles
        out = np.zeros((D.size, *c.shape[1:]), dtype=np.result_type(c, float))
        for lo in range(0, self.n_bright, _BLOCK):
            sl = slice(lo, lo + _BLOCK)
            diff = (D[self._anchor[sl], None] - D[None, :]) + self._delta[sl, None]
            out += (1.0 / diff).T @ c[sl]
        return out

    def project(self, vec) -> np.ndarray:
        """Eigen-coefficients V^T x of a full-length vector (apex first)."""
        vec = np.asarray(vec)
        if vec.shape != (self.size,):
            raise ValueError(f"expected vector of length {self.size}")
        out = np.zeros(self.size, dtype=np.result_type(vec, float))
        body = vec[1:]
        nb = self.n_bright
        if self._bright_poles.size:
            bright = self._group_of >= 0
            y = np.zeros(self._bright_poles.size, dtype=out.dtype)
            np.add.at(y, self._group_of[bright], self.couplings[bright] * body[bright])
            out[:nb] = self.apex_weights[:nb] * (vec[0] + self._cauchy_rows(y))
        else:
            out[:nb] = vec[0]
        for blk in self._dark:
            coeff = np.einsum("gk,gkr->gr", body[blk.members], blk.vectors)
            out[blk.offset:blk.offset + coeff.size] = coeff.ravel()
        return out

    def apply(self, coeffs) -> np.ndarray:
        """Full-length vector V c from eigen-coefficients.

        ``coeffs`` may be 2-d, one coefficient vector per column; the Cauchy
        blocks are then shared across columns.
        """
        coeffs = np.asarray(coeffs)
        if coeffs.shape[0] != self.size:
            raise ValueError(f"expected {self.size} coefficients")
        out = np.zeros(coeffs.shape, dtype=np.result_type(coeffs, float))
        nb = self.n_bright
        tail = (slice(None),) * (coeffs.ndim - 1)
        weighted = (self.apex_weights[:nb] * coeffs[:nb].T).T
        out[0] = weighted.sum(axis=0)
        if self._bright_poles.size:
            w = self._cauchy_cols(weighted)
            idx = np.nonzero(self._group_of >= 0)[0]
            out[(1 + idx, *tail)] = (self.couplings[idx] * w[self._group_of[idx]].T).T
        for blk in self._dark:
            g, k, r = blk.vectors.shape
            c = coeffs[blk.offset:blk.offset + g * r].reshape(g, r, *coeffs.shape[1:])
            np.add.at(out, 1 + blk.members, np.einsum("gkr,gr...->gk...", blk.vectors, c))
        return out

    def evolve(self, coeffs, t: float) -> np.ndarray:
        """Eigen-coefficients after propagation by exp(-i H t)."""
        return np.exp(-1j * self.eigenvalues * t) * coeffs

    def bilinear(self, left_coeffs, right_coeffs, times) -> np.ndarray:
        """x^T exp(-i H t) y for projected x, y, vectorised over ``times``."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        weights = np.asarray(left_coeffs) * np.asarray(right_coeffs)
        out = np.empty(times.size, dtype=complex)
        chunk = max(1, 2_000_000 // max(1, self.size))
        for lo in range(0, times.size, chunk):
            t = times[lo:lo + chunk]
            out[lo:lo + chunk] = np.exp(-1j * np.outer(t, self.eigenvalues)) @ weights
        return out

    def orthogonality_defect(self, probes: int = 4, seed: int = 0) -> float:
        """Max of |V^T V x - x| and |V V^T x - x| over unit probe vectors.

        Includes the apex vector plus ``probes`` fixed pseudo-random vectors;
        the seed only makes the diagnostic reproducible.
        """
        rng = np.random.default_rng(seed)
        vecs = [np.eye(1, self.size, 0).ravel()]
        for _ in range(probes):
            v = rng.standard_normal(self.size)
            vecs.append(v / np.linalg.norm(v))
        worst = 0.0
        for v in vecs:
            worst = max(worst, float(np.linalg.norm(self.apply(self.project(v)) - v)))
            worst = max(worst, float(np.linalg.norm(self.project(self.apply(v)) - v)))
        return worst

    def dense(self) -> np.ndarray:
        """Dense eigenvector matrix; for small systems and tests only."""
        return np.column_stack([self.apply(np.eye(1, self.size, n).ravel()) for n in range(self.size)])
