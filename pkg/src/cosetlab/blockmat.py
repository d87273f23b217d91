"""Block-partitioned dense matrices, exact permutations, embeddings and norms.

A square matrix of size alpha + m*(k + n_tail) is sliced into a distinguished
``corner`` of size alpha followed by m copies, each split into an ``active``
leading k-block and a ``tail`` of size n_tail.  Permutation matrices carry
their image word alongside the dense entries so symmetric-group arithmetic
stays exact.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "BlockSpec",
    "BlockMatrix",
    "PermutationWord",
    "block",
    "embed",
    "embed_k",
    "build_JN",
    "operator_norm",
    "is_unitary",
]


@dataclass(frozen=True)
class BlockSpec:
    """Partition of {1..dim} into corner | (active_1, tail_1) | ... | (active_m, tail_m)."""

    alpha: int
    k: int
    n_tail: int
    m: int = 1

    def __post_init__(self):
        if self.alpha < 0 or self.n_tail < 0:
            raise ValueError("alpha and n_tail must be nonnegative")
        if self.k < 1 or self.m < 1:
            raise ValueError("k and m must be positive")
        if self.dim < 1:
            raise ValueError("total dimension must be >= 1")

    @property
    def copy_size(self) -> int:
        return self.k + self.n_tail

    @property
    def dim(self) -> int:
        return self.alpha + self.m * self.copy_size

    @property
    def window(self) -> int:
        """Dimension of the embedded subgroup acting on corner + active blocks."""
        return self.alpha + self.m * self.k

    def copy_slice(self, c: int) -> slice:
        # c is 0-based; whole copy (active + tail)
        start = self.alpha + c * self.copy_size
        return slice(start, start + self.copy_size)

    def block_slice(self, name: str) -> slice:
        """Index range of a named block: 'corner', 'active_i' or 'tail_i' (i is 1-based)."""
        if name == "corner":
            return slice(0, self.alpha)
        kind, _, idx = name.partition("_")
        if kind not in ("active", "tail") or not idx.isdigit():
            raise KeyError(f"unknown block name: {name!r}")
        c = int(idx)
        if not 1 <= c <= self.m:
            raise KeyError(f"block copy index out of range: {name!r}")
        start = self.alpha + (c - 1) * self.copy_size
        if kind == "active":
            return slice(start, start + self.k)
        return slice(start + self.k, start + self.copy_size)


class PermutationWord:
    """A permutation of {1..n} stored as the tuple of images (1-based)."""

    __slots__ = ("images",)

    def __init__(self, images):
        images = tuple(int(i) for i in images)
        if sorted(images) != list(range(1, len(images) + 1)):
            raise ValueError(f"not a permutation of 1..{len(images)}: {images}")
        object.__setattr__(self, "images", images)

    @property
    def degree(self) -> int:
        return len(self.images)

    @classmethod
    def identity(cls, n: int) -> "PermutationWord":
        return cls(range(1, n + 1))

    @classmethod
    def from_cycles(cls, n: int, cycles) -> "PermutationWord":
        im = list(range(1, n + 1))
        for cyc in cycles:
            for i, a in enumerate(cyc):
                im[a - 1] = cyc[(i + 1) % len(cyc)]
        return cls(im)

    @classmethod
    def parse(cls, text: str, degree: int | None = None) -> "PermutationWord":
        """Parse "(1 2)(3 4)" cycle notation or "2,1,3" image-list notation.

        A leading "(" selects cycle notation; "identity" needs an explicit degree.
        """
        text = text.strip()
        if text == "identity":
            if degree is None:
                raise ValueError("'identity' needs an explicit degree")
            return cls.identity(degree)
        if text.startswith("("):
            cycles = []
            for chunk in text.replace(")", ")|").split("|"):
                chunk = chunk.strip()
                if not chunk:
                    continue
                if not (chunk.startswith("(") and chunk.endswith(")")):
                    raise ValueError(f"malformed cycle notation: {text!r}")
                entries = chunk[1:-1].replace(",", " ").split()
                cycles.append([int(e) for e in entries])
            n = degree if degree is not None else max((a for c in cycles for a in c), default=1)
            return cls.from_cycles(n, cycles)
        images = [int(e) for e in text.replace(",", " ").split()]
        word = cls(images)
        if degree is not None and word.degree != degree:
            raise ValueError(f"expected degree {degree}, got {word.degree}")
        return word

    def __call__(self, i: int) -> int:
        return self.images[i - 1]

    def __mul__(self, other: "PermutationWord") -> "PermutationWord":
        # function composition: (self*other)(i) = self(other(i)), matching matrix product
        if self.degree != other.degree:
            raise ValueError("degree mismatch")
        return PermutationWord(self.images[j - 1] for j in other.images)

    def inverse(self) -> "PermutationWord":
        out = [0] * self.degree
        for i, v in enumerate(self.images):
            out[v - 1] = i + 1
        return PermutationWord(out)

    def matrix(self) -> np.ndarray:
        """0-1 matrix P with P @ e_j = e_{images[j]}."""
        n = self.degree
        P = np.zeros((n, n))
        for j, im in enumerate(self.images):
            P[im - 1, j] = 1.0
        return P

    def __eq__(self, other):
        return isinstance(other, PermutationWord) and self.images == other.images

    def __hash__(self):
        return hash(self.images)

    def __repr__(self):
        return f"PermutationWord({list(self.images)})"


class BlockMatrix:
    """Dense complex square matrix, optionally block-partitioned and/or an exact permutation."""

    __slots__ = ("entries", "spec", "exact_permutation")

    def __init__(self, entries, spec: BlockSpec | None = None,
                 exact_permutation: PermutationWord | None = None):
        entries = np.ascontiguousarray(entries, dtype=complex)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValueError("entries must be a square matrix")
        if spec is not None and spec.dim != entries.shape[0]:
            raise ValueError(f"spec dimension {spec.dim} != matrix dimension {entries.shape[0]}")
        if exact_permutation is not None:
            if exact_permutation.degree != entries.shape[0]:
                raise ValueError("permutation degree mismatch")
            if np.abs(entries - exact_permutation.matrix()).max() != 0.0:
                raise ValueError("entries do not match the claimed exact permutation")
        self.entries = entries
        self.spec = spec
        self.exact_permutation = exact_permutation

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def identity(cls, dim: int, spec: BlockSpec | None = None) -> "BlockMatrix":
        return cls(np.eye(dim, dtype=complex), spec, PermutationWord.identity(dim))

    @classmethod
    def from_permutation(cls, word: PermutationWord, spec: BlockSpec | None = None) -> "BlockMatrix":
        return cls(word.matrix(), spec, word)

    def __matmul__(self, other: "BlockMatrix") -> "BlockMatrix":
        if self.dim != other.dim:
            raise ValueError("dimension mismatch")
        spec = self.spec or other.spec
        if self.exact_permutation is not None and other.exact_permutation is not None:
            return BlockMatrix.from_permutation(
                self.exact_permutation * other.exact_permutation, spec)
        return BlockMatrix(self.entries @ other.entries, spec)

    def inverse(self) -> "BlockMatrix":
        if self.exact_permutation is not None:
            return BlockMatrix.from_permutation(self.exact_permutation.inverse(), self.spec)
        return BlockMatrix(np.linalg.inv(self.entries), self.spec)

    def to_json_dict(self) -> dict:
        """Matrix file format: {"perm": [...]} for exact permutations, else {"dim", "re", "im"}."""
        if self.exact_permutation is not None:
            return {"perm": list(self.exact_permutation.images)}
        return {
            "dim": self.dim,
            "re": self.entries.real.tolist(),
            "im": self.entries.imag.tolist(),
        }

    @classmethod
    def from_json_dict(cls, data: dict, spec: BlockSpec | None = None) -> "BlockMatrix":
        if "perm" in data:
            return cls.from_permutation(PermutationWord(data["perm"]), spec)
        entries = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
        if entries.shape != (data["dim"], data["dim"]):
            raise ValueError("re/im shape does not match dim")
        return cls(entries, spec)

    def __repr__(self):
        tag = " perm" if self.exact_permutation is not None else ""
        return f"<BlockMatrix dim={self.dim}{tag}>"


def block(mat: BlockMatrix, row_block: str, col_block: str) -> np.ndarray:
    """Copy of the sub-matrix addressed by named row/column blocks."""
    if mat.spec is None:
        raise ValueError("matrix has no block spec")
    return mat.entries[mat.spec.block_slice(row_block), mat.spec.block_slice(col_block)].copy()


def _window_indices(spec: BlockSpec) -> list[int]:
    # 0-based positions of the embedded subgroup: corner then each copy's active block
    idx = list(range(spec.alpha))
    for c in range(spec.m):
        start = spec.alpha + c * spec.copy_size
        idx.extend(range(start, start + spec.k))
    return idx


def _window_perm_to_full(word: PermutationWord, spec: BlockSpec) -> PermutationWord:
    idx = _window_indices(spec)  # idx[i-1]+1 is the full-space position of window point i
    im = list(range(1, spec.dim + 1))
    for i, target in enumerate(word.images):
        im[idx[i]] = idx[target - 1] + 1
    return PermutationWord(im)


def embed(g: BlockMatrix, spec: BlockSpec) -> BlockMatrix:
    """Lift an element of the (alpha + m*k)-dimensional subgroup to full size.

    The corner and active blocks of the result are g's blocks; every tail
    carries the identity, so the result is unitary whenever g is.
    """
    if g.dim != spec.window:
        raise ValueError(f"expected dimension {spec.window}, got {g.dim}")
    if g.exact_permutation is not None:
        return BlockMatrix.from_permutation(
            _window_perm_to_full(g.exact_permutation, spec), spec)
    out = np.eye(spec.dim, dtype=complex)
    idx = _window_indices(spec)
    out[np.ix_(idx, idx)] = g.entries
    return BlockMatrix(out, spec)


def embed_k(u, spec: BlockSpec) -> BlockMatrix:
    """Place m identical diagonal copies of u (size k + n_tail) after an identity corner."""
    w = spec.copy_size
    if isinstance(u, PermutationWord):
        if u.degree != w:
            raise ValueError(f"expected degree {w}, got {u.degree}")
        im = list(range(1, spec.dim + 1))
        for c in range(spec.m):
            base = spec.alpha + c * w
            for j, target in enumerate(u.images):
                im[base + j] = base + target
        return BlockMatrix.from_permutation(PermutationWord(im), spec)
    u = np.asarray(u)
    if u.shape != (w, w):
        raise ValueError(f"expected a {w}x{w} matrix, got {u.shape}")
    out = np.eye(spec.dim, dtype=complex)
    for c in range(spec.m):
        sl = spec.copy_slice(c)
        out[sl, sl] = u
    return BlockMatrix(out, spec)


def build_JN(spec: BlockSpec) -> BlockMatrix:
    """Involution swapping each copy's active block with the first k tail slots.

    Requires n_tail >= k so the tail has room for the swap.
    """
    if spec.n_tail < spec.k:
        raise ValueError(f"n_tail={spec.n_tail} < k={spec.k}: tail too short for the block swap")
    im = list(range(1, spec.dim + 1))
    for c in range(spec.m):
        base = spec.alpha + c * spec.copy_size
        for j in range(spec.k):
            im[base + j], im[base + spec.k + j] = im[base + spec.k + j], im[base + j]
    return BlockMatrix.from_permutation(PermutationWord(im), spec)


def operator_norm(mat) -> float:
    """Largest singular value; 0 for an empty matrix."""
    a = mat.entries if isinstance(mat, BlockMatrix) else np.asarray(mat)
    if a.size == 0:
        return 0.0
    return float(np.linalg.svd(a, compute_uv=False)[0])


def is_unitary(mat, tol: float = 1e-10) -> bool:
    a = mat.entries if isinstance(mat, BlockMatrix) else np.asarray(mat, dtype=complex)
    n = a.shape[0]
    return operator_norm(a.conj().T @ a - np.eye(n)) <= tol
