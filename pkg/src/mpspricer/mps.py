"""Matrix product state container and contraction primitives.

An MPS here is a chain of order-3 real tensors with shapes
``(D_{k-1}, d_k, D_k)``; the first left bond and the last right bond are 1.
Evaluating the chain at a multi-index picks one matrix per site and
multiplies them; summing over all indices contracts every physical leg
with a vector of ones. Both cost O(N d D^2), never O(d^N).
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

DENSE_ELEMENT_CAP = 2**24


class MPS:
    """Immutable matrix product state over finite discrete axes.

    Parameters
    ----------
    tensors:
        Site tensors, each a real array of shape ``(D_left, d, D_right)``.
        Boundary bonds must be 1 and adjacent bonds must match.
    """

    __slots__ = ("_tensors",)

    def __init__(self, tensors: Iterable[np.ndarray]):
        sites = []
        for k, t in enumerate(tensors):
            arr = np.array(t, dtype=np.float64, copy=True)
            if arr.ndim != 3:
                raise ValueError(
                    f"site {k}: expected a rank-3 tensor, got shape {arr.shape}"
                )
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"site {k}: tensor contains non-finite entries")
            arr.flags.writeable = False
            sites.append(arr)
        if not sites:
            raise ValueError("an MPS needs at least one site")
        if sites[0].shape[0] != 1:
            raise ValueError(
                f"left boundary bond must be 1, got {sites[0].shape[0]}"
            )
        if sites[-1].shape[2] != 1:
            raise ValueError(
                f"right boundary bond must be 1, got {sites[-1].shape[2]}"
            )
        for k in range(len(sites) - 1):
            if sites[k].shape[2] != sites[k + 1].shape[0]:
                raise ValueError(
                    f"bond {k}: right bond {sites[k].shape[2]} of site {k} does not "
                    f"match left bond {sites[k + 1].shape[0]} of site {k + 1}"
                )
        self._tensors = tuple(sites)

    @property
    def tensors(self) -> tuple[np.ndarray, ...]:
        return self._tensors

    @property
    def n_sites(self) -> int:
        return len(self._tensors)

    @property
    def physical_dims(self) -> tuple[int, ...]:
        return tuple(t.shape[1] for t in self._tensors)

    @property
    def bond_dims(self) -> tuple[int, ...]:
        """Internal bond dimensions, length ``n_sites - 1``."""
        return tuple(t.shape[2] for t in self._tensors[:-1])

    @property
    def max_bond(self) -> int:
        return max(self.bond_dims, default=1)

    def __len__(self) -> int:
        return len(self._tensors)

    def _check_index(self, indices: Sequence[int]) -> None:
        if len(indices) != self.n_sites:
            raise ValueError(
                f"index tuple has length {len(indices)}, expected {self.n_sites}"
            )

    def evaluate(self, indices: Sequence[int]) -> float:
        """Value of the encoded tensor at one multi-index."""
        self._check_index(indices)
        vec = np.ones((1,))
        for k, t in enumerate(self._tensors):
            x = int(indices[k])
            if not 0 <= x < t.shape[1]:
                raise ValueError(
                    f"site {k}: index {x} outside physical range {t.shape[1]}"
                )
            vec = vec @ t[:, x, :]
        return float(vec[0])

    def evaluate_batch(self, indices: np.ndarray) -> np.ndarray:
        """Evaluate many multi-indices at once.

        Parameters
        ----------
        indices:
            Integer array of shape ``(B, n_sites)``.

        Returns
        -------
        Array of shape ``(B,)`` with one value per row.
        """
        idx = np.asarray(indices)
        if idx.ndim != 2 or idx.shape[1] != self.n_sites:
            raise ValueError(
                f"expected index array of shape (B, {self.n_sites}), got {idx.shape}"
            )
        if idx.shape[0] == 0:
            return np.zeros(0)
        for k, d in enumerate(self.physical_dims):
            col = idx[:, k]
            if col.min() < 0 or col.max() >= d:
                raise ValueError(
                    f"site {k}: indices outside physical range {d}"
                )
        cur = self._tensors[0][0, idx[:, 0], :]  # (B, D)
        for k in range(1, self.n_sites):
            mats = self._tensors[k][:, idx[:, k], :]  # (D_l, B, D_r)
            cur = np.einsum("bl,lbr->br", cur, mats, optimize=True)
        return cur[:, 0]

    def sum_all(self) -> float:
        """Sum of the encoded tensor over every index combination."""
        vec = np.ones((1,))
        for t in self._tensors:
            vec = vec @ t.sum(axis=1)
        return float(vec[0])

    def apply_site_matrices(self, mats: Sequence[np.ndarray]) -> "MPS":
        """Apply one matrix to each physical leg.

        ``mats[k]`` must have column count equal to the site's physical
        dimension; the new physical dimension is its row count.
        """
        if len(mats) != self.n_sites:
            raise ValueError(
                f"got {len(mats)} matrices for {self.n_sites} sites"
            )
        new_sites = []
        for k, (m, t) in enumerate(zip(mats, self._tensors)):
            mat = np.asarray(m, dtype=np.float64)
            if mat.ndim != 2 or mat.shape[1] != t.shape[1]:
                raise ValueError(
                    f"site {k}: matrix shape {mat.shape} does not act on "
                    f"physical dimension {t.shape[1]}"
                )
            new_sites.append(np.einsum("pd,ldr->lpr", mat, t, optimize=True))
        return MPS(new_sites)

    def to_dense(self, max_elements: int = DENSE_ELEMENT_CAP) -> np.ndarray:
        """Contract to a dense array of shape ``physical_dims``.

        Refuses when the element count exceeds ``max_elements``.
        """
        total = 1
        for d in self.physical_dims:
            total *= d
        if total > max_elements:
            raise ValueError(
                f"dense conversion needs {total} elements, cap is {max_elements}"
            )
        res = self._tensors[0][0]  # (d_0, D)
        for t in self._tensors[1:]:
            res = np.tensordot(res, t, axes=([-1], [0]))
        return res[..., 0]

    def to_document(self) -> dict:
        """Plain-data description: list of sites with shape and row-major values."""
        return {
            "format": "mps",
            "sites": [
                {"shape": list(t.shape), "values": t.ravel(order="C").tolist()}
                for t in self._tensors
            ],
        }

    @classmethod
    def from_document(cls, doc: dict) -> "MPS":
        if doc.get("format") != "mps":
            raise ValueError("document is not an MPS dump")
        sites = [
            np.array(site["values"], dtype=np.float64).reshape(site["shape"])
            for site in doc["sites"]
        ]
        return cls(sites)

    def __repr__(self) -> str:
        dims = "x".join(str(d) for d in self.physical_dims)
        return f"MPS(n_sites={self.n_sites}, dims={dims}, max_bond={self.max_bond})"
