"""Dependency-tree ingestion (CoNLL-U) and depth computation.

No parser is embedded: trees come from any external parser as CoNLL-U, and
a clearly-approximate heuristic estimator is available when no trees are
supplied.  Depth convention: a node attached to the root has depth 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO, Iterable, Sequence

from .errors import InputError
from .text import Sentence, as_tokens

__all__ = [
    "ROOT",
    "DepTree",
    "parse_conllu",
    "serialize_conllu",
    "tree_depth",
    "estimate_depth_heuristic",
]

ROOT = -1  # head marker for the unique root-attached node

_CONLLU_COLUMNS = 10


def _node_depths(heads: Sequence[int]) -> list[int]:
    """Depth of every node (root-attached = 1); raises ValueError on a cycle."""
    n = len(heads)
    depths = [0] * n  # 0 = not yet computed
    for start in range(n):
        if depths[start]:
            continue
        chain = []
        node = start
        while node != ROOT and not depths[node]:
            chain.append(node)
            node = heads[node]
            if len(chain) > n:
                raise ValueError("cycle in head chain")
        base = 0 if node == ROOT else depths[node]
        for offset, visited in enumerate(reversed(chain), start=1):
            depths[visited] = base + offset
    return depths


@dataclass(frozen=True)
class DepTree:
    """One sentence's dependency structure: tokens plus 0-based head indices."""

    tokens: tuple[str, ...]
    heads: tuple[int, ...]

    def __post_init__(self):
        if len(self.tokens) != len(self.heads) or not self.tokens:
            raise ValueError("tokens and heads must be non-empty and aligned")
        roots = sum(1 for h in self.heads if h == ROOT)
        if roots != 1:
            raise ValueError(f"expected exactly one root-attached node, found {roots}")
        n = len(self.heads)
        for i, h in enumerate(self.heads):
            if h != ROOT and not 0 <= h < n:
                raise ValueError(f"head index {h} of token {i} out of range")
            if h == i:
                raise ValueError(f"token {i} is its own head")
        _node_depths(self.heads)  # raises on cycles


def tree_depth(tree: DepTree) -> int:
    """Length of the longest head chain from any node to the root (>= 1)."""
    return max(_node_depths(tree.heads))


def _is_skippable_id(token_id: str) -> bool:
    # multiword ranges ("3-4") and empty nodes ("3.1") carry no head
    return "-" in token_id or "." in token_id


def parse_conllu(stream: IO[str] | Iterable[str]) -> list[DepTree]:
    """Parse CoNLL-U sentence blocks into DepTrees.

    Comment lines and multiword/empty-node lines are skipped.  HEAD is
    1-based with 0 denoting the root.  Cycles, missing/multiple roots,
    dangling heads and non-numeric HEAD fields raise InputError naming
    the sentence and line.
    """
    trees: list[DepTree] = []
    rows: list[tuple[int, str, int]] = []  # (id, form, head)
    block_line = 0

    def finalize(lineno: int):
        nonlocal rows
        if not rows:
            return
        index_of = {tok_id: i for i, (tok_id, _, _) in enumerate(rows)}
        heads = []
        for tok_id, _, head in rows:
            if head == 0:
                heads.append(ROOT)
            elif head in index_of:
                heads.append(index_of[head])
            else:
                raise InputError(
                    f"sentence {len(trees) + 1} (ending line {lineno}): "
                    f"HEAD {head} of token {tok_id} does not exist"
                )
        try:
            trees.append(DepTree(tuple(form for _, form, _ in rows), tuple(heads)))
        except ValueError as exc:
            raise InputError(
                f"sentence {len(trees) + 1} (ending line {lineno}): {exc}"
            ) from exc
        rows = []

    lineno = 0
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            finalize(lineno)
            continue
        if line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != _CONLLU_COLUMNS:
            raise InputError(
                f"sentence {len(trees) + 1}, line {lineno}: "
                f"expected {_CONLLU_COLUMNS} tab-separated columns, got {len(cols)}"
            )
        if _is_skippable_id(cols[0]):
            continue
        try:
            tok_id = int(cols[0])
        except ValueError:
            raise InputError(
                f"sentence {len(trees) + 1}, line {lineno}: bad token ID {cols[0]!r}"
            ) from None
        try:
            head = int(cols[6])
        except ValueError:
            raise InputError(
                f"sentence {len(trees) + 1}, line {lineno}: non-numeric HEAD {cols[6]!r}"
            ) from None
        if not rows:
            block_line = lineno
        rows.append((tok_id, cols[1], head))
    finalize(lineno + 1)
    return trees


def serialize_conllu(trees: Iterable[DepTree]) -> str:
    """Render trees back to minimal CoNLL-U (tokens and heads preserved)."""
    blocks = []
    for tree in trees:
        lines = []
        for i, (form, head) in enumerate(zip(tree.tokens, tree.heads), start=1):
            head_col = 0 if head == ROOT else head + 1
            deprel = "root" if head == ROOT else "dep"
            lines.append(f"{i}\t{form}\t_\t_\t_\t_\t{head_col}\t{deprel}\t_\t_")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n" if blocks else ""


# Clause-nesting cues for the fallback estimator.
_SUBORDINATORS = frozenset(
    "because although though while since unless until whereas if when after "
    "before that which who whom whose where why whether".split()
)


def estimate_depth_heuristic(sentence: "Sentence | str | Sequence[str]") -> int:
    """Approximate tree depth from clause cues and length.

    Deterministic, >= 1, and monotone non-decreasing in token count for a
    fixed number of cues.  Reports using it are flagged, since it is only
    a stand-in for parsed trees.
    """
    tokens = as_tokens(sentence)
    cues = 0
    for tok in tokens:
        low = tok.lower()
        if low in _SUBORDINATORS or tok in {",", ";", "("}:
            cues += 1
    return 1 + cues + len(tokens) // 8
