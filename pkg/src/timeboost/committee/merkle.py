"""Append-only Merkle accumulator over the block chain.

Binary tree in the Certificate-Transparency style: the root of n leaves
splits at the largest power of two below n.  Appends cost amortized O(1)
via a peak stack; inclusion proofs and prefix-consistency proofs are
O(log n) in size.  Leaf and interior hashes are domain-separated.
"""

from __future__ import annotations

from .crypto import sha256

_LEAF = b"\x00"
_NODE = b"\x01"


def leaf_hash(data: bytes) -> bytes:
    return sha256(_LEAF + data)


def node_hash(left: bytes, right: bytes) -> bytes:
    return sha256(_NODE + left + right)


def _largest_pow2_below(n: int) -> int:
    """Largest power of two strictly less than n (n >= 2)."""
    return 1 << (n - 1).bit_length() - 1


class MerkleAccumulator:
    """Accumulator retaining leaf hashes for proof generation.

    The digest-relevant commitment is (size, root); the retained leaves let
    a replica serve proofs and rewind to an earlier chain prefix.
    """

    def __init__(self) -> None:
        self._leaves: list[bytes] = []
        # Stack of (height, hash) for maximal perfect subtrees, left to right.
        self._peaks: list[tuple[int, bytes]] = []

    def __len__(self) -> int:
        return len(self._leaves)

    def append(self, data: bytes) -> None:
        h = leaf_hash(data)
        self._leaves.append(h)
        self._push_peak(0, h)

    def _push_peak(self, height: int, h: bytes) -> None:
        while self._peaks and self._peaks[-1][0] == height:
            _, left = self._peaks.pop()
            h = node_hash(left, h)
            height += 1
        self._peaks.append((height, h))

    def root(self) -> bytes:
        """Root over all appended leaves; empty accumulator hashes the empty string."""
        if not self._peaks:
            return sha256(b"")
        acc = self._peaks[-1][1]
        for _, h in reversed(self._peaks[:-1]):
            acc = node_hash(h, acc)
        return acc

    def root_at(self, size: int) -> bytes:
        """Root over the first `size` leaves."""
        if size < 0 or size > len(self._leaves):
            raise ValueError(f"size {size} out of range 0..{len(self._leaves)}")
        if size == 0:
            return sha256(b"")
        return self._subtree_root(0, size)

    def _subtree_root(self, lo: int, hi: int) -> bytes:
        n = hi - lo
        if n == 1:
            return self._leaves[lo]
        k = _largest_pow2_below(n)
        return node_hash(self._subtree_root(lo, lo + k), self._subtree_root(lo + k, hi))

    def truncate(self, size: int) -> None:
        """Drop everything after the first `size` leaves (chain rewind)."""
        if size < 0 or size > len(self._leaves):
            raise ValueError(f"size {size} out of range 0..{len(self._leaves)}")
        self._leaves = self._leaves[:size]
        self._peaks = []
        for h in self._leaves:
            self._push_peak(0, h)

    # -- inclusion proofs ---------------------------------------------------

    def prove_inclusion(self, index: int, size: int | None = None) -> list[bytes]:
        """Audit path for leaf `index` against the root over `size` leaves."""
        size = len(self._leaves) if size is None else size
        if not (0 <= index < size <= len(self._leaves)):
            raise ValueError(f"index {index} not within tree of size {size}")
        path: list[bytes] = []
        lo, hi = 0, size
        while hi - lo > 1:
            k = _largest_pow2_below(hi - lo)
            if index < lo + k:
                path.append(self._subtree_root(lo + k, hi))
                hi = lo + k
            else:
                path.append(self._subtree_root(lo, lo + k))
                lo = lo + k
        path.reverse()
        return path

    @staticmethod
    def verify_inclusion(root: bytes, size: int, index: int, leaf: bytes, path: list[bytes]) -> bool:
        """Check `leaf` (a leaf hash) against `root` via the audit path."""
        if not (0 <= index < size):
            return False

        def expect_len(idx: int, n: int) -> int:
            length = 0
            lo, hi = 0, n
            while hi - lo > 1:
                k = _largest_pow2_below(hi - lo)
                length += 1
                if idx < lo + k:
                    hi = lo + k
                else:
                    lo = lo + k
            return length

        if len(path) != expect_len(index, size):
            return False
        h = leaf
        idx, n = index, size
        # Replay the descent bottom-up: recompute split boundaries top-down
        # first, then fold the path from the leaf upwards.
        splits: list[tuple[bool, None]] = []
        lo, hi = 0, n
        while hi - lo > 1:
            k = _largest_pow2_below(hi - lo)
            if idx < lo + k:
                splits.append((True, None))  # we are in the left subtree
                hi = lo + k
            else:
                splits.append((False, None))
                lo = lo + k
        for (is_left, _), sib in zip(reversed(splits), path):
            h = node_hash(h, sib) if is_left else node_hash(sib, h)
        return h == root

    # -- prefix consistency proofs -------------------------------------------

    def prove_consistency(self, old_size: int, new_size: int | None = None) -> list[bytes]:
        """Proof that the root over old_size leaves is a prefix of new_size's."""
        new_size = len(self._leaves) if new_size is None else new_size
        if not (1 <= old_size <= new_size <= len(self._leaves)):
            raise ValueError(f"need 1 <= old {old_size} <= new {new_size} <= {len(self._leaves)}")
        return self._subproof(old_size, 0, new_size, True)

    def _subproof(self, m: int, lo: int, hi: int, old_is_complete: bool) -> list[bytes]:
        n = hi - lo
        if m == n:
            return [] if old_is_complete else [self._subtree_root(lo, hi)]
        k = _largest_pow2_below(n)
        if m <= k:
            return self._subproof(m, lo, lo + k, old_is_complete) + [self._subtree_root(lo + k, hi)]
        return self._subproof(m - k, lo + k, hi, False) + [self._subtree_root(lo, lo + k)]

    @staticmethod
    def verify_consistency(old_root: bytes, old_size: int, new_root: bytes,
                           new_size: int, proof: list[bytes]) -> bool:
        if old_size < 1 or old_size > new_size:
            return False
        if old_size == new_size:
            return old_root == new_root and not proof

        items = list(proof)

        def recon(m: int, n: int, complete: bool) -> tuple[bytes, bytes] | None:
            # Mirrors _subproof; consumes `items` from the end. Returns
            # (old subtree root, new subtree root) or None on malformed proof.
            if m == n:
                if complete:
                    return old_root, old_root
                if not items:
                    return None
                h = items.pop()
                return h, h
            k = _largest_pow2_below(n)
            if not items:
                return None
            sib = items.pop()
            if m <= k:
                sub = recon(m, k, complete)
                if sub is None:
                    return None
                sub_old, sub_new = sub
                return sub_old, node_hash(sub_new, sib)
            sub = recon(m - k, n - k, False)
            if sub is None:
                return None
            sub_old, sub_new = sub
            return node_hash(sib, sub_old), node_hash(sib, sub_new)

        result = recon(old_size, new_size, True)
        if result is None or items:
            return False
        got_old, got_new = result
        return got_old == old_root and got_new == new_root
