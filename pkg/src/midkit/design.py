"""Assembly of the constrained least-squares system.

One design block per term: main-effect blocks hold per-row encoder weights,
interaction blocks hold products of two encoders' weights. Each main block
contributes one centering-constraint row; an interaction block over a
(k_p, k_q) grid contributes k_p + k_q grid-line rows. Constraint entries
equal design column sums, which also form the diagonal weight matrix used
for minimum-norm selection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from . import kernels
from .data import Dataset
from .encoding import Encoder, encode_column
from .errors import DataError

TermKey = tuple[int, ...]


def term_key(features) -> TermKey:
    key = tuple(sorted(int(f) for f in features))
    if len(key) not in (1, 2):
        raise DataError(f"terms must have 1 or 2 features, got {len(key)}")
    if len(set(key)) != len(key):
        raise DataError(f"term {key} repeats a feature")
    return key


def sort_terms(terms) -> list[TermKey]:
    keys = [term_key(t) for t in terms]
    if len(set(keys)) != len(keys):
        raise DataError("duplicate terms")
    return sorted(keys, key=lambda t: (len(t), t))


@dataclass
class LinearSystem:
    design: sp.csr_matrix  # n x m, entries >= 0
    constraints: np.ndarray  # c x m, rows touch a single term's columns
    delta: np.ndarray  # column sums of design (diagonal weights)
    terms: list[TermKey]
    layout: list[slice]  # column range of each term
    n_rows: int

    @property
    def n_cols(self) -> int:
        return self.design.shape[1]

    @property
    def live(self) -> np.ndarray:
        return self.delta > 0.0

    def term_slice(self, term: TermKey) -> slice:
        return self.layout[self.terms.index(term)]


def _encoded(cache, dataset, feature, encoder):
    key = id(encoder)
    if key not in cache:
        cache[key] = encode_column(encoder, dataset.columns[feature])
    return cache[key]


def assemble(
    dataset: Dataset,
    main_encoders: dict[int, Encoder],
    terms,
    inter_encoders: dict[int, Encoder] | None = None,
) -> LinearSystem:
    """Build design, constraints and column weights for the given terms.

    main_encoders supply the basis for order-1 terms; inter_encoders (default:
    main_encoders) supply the per-feature bases whose products encode pairs.
    """
    if not terms:
        raise DataError("no terms to assemble")
    terms = [term_key(t) for t in terms]
    if inter_encoders is None:
        inter_encoders = main_encoders
    for t in terms:
        encs = main_encoders if len(t) == 1 else inter_encoders
        for f in t:
            if f < 0 or f >= len(dataset.columns):
                raise DataError(f"term feature index {f} out of range")
            if f not in encs:
                raise DataError(f"no encoder for feature {dataset.columns[f].name!r}")

    n = dataset.n_rows
    cache: dict = {}
    layout: list[slice] = []
    offset = 0
    rows_parts, cols_parts, data_parts = [], [], []
    n_constraints = 0
    for t in terms:
        if len(t) == 1:
            enc = main_encoders[t[0]]
            i0, w0, i1, w1 = _encoded(cache, dataset, t[0], enc)
            rows_parts.append(np.tile(np.arange(n), 2))
            cols_parts.append(np.concatenate([i0, i1]) + offset)
            data_parts.append(np.concatenate([w0, w1]))
            width = enc.k
            n_constraints += 1
        else:
            p, q = t
            ep, eq = inter_encoders[p], inter_encoders[q]
            pi0, pw0, pi1, pw1 = _encoded(cache, dataset, p, ep)
            qi0, qw0, qi1, qw1 = _encoded(cache, dataset, q, eq)
            cols4, data4 = kernels.pair_design(pi0, pw0, pi1, pw1, qi0, qw0, qi1, qw1, eq.k)
            rows_parts.append(np.repeat(np.arange(n), 4))
            cols_parts.append(cols4.ravel() + offset)
            data_parts.append(data4.ravel())
            width = ep.k * eq.k
            n_constraints += ep.k + eq.k
        layout.append(slice(offset, offset + width))
        offset += width

    m = offset
    design = sp.coo_matrix(
        (np.concatenate(data_parts), (np.concatenate(rows_parts), np.concatenate(cols_parts))),
        shape=(n, m),
    ).tocsr()
    delta = np.asarray(design.sum(axis=0)).ravel()

    constraints = np.zeros((n_constraints, m))
    row = 0
    for t, sl in zip(terms, layout):
        if len(t) == 1:
            constraints[row, sl] = delta[sl]
            row += 1
        else:
            p, q = t
            kp, kq = inter_encoders[p].k, inter_encoders[q].k
            cells = delta[sl].reshape(kp, kq)
            base = sl.start
            for s in range(kp):
                constraints[row, base + s * kq : base + (s + 1) * kq] = cells[s, :]
                row += 1
            for b in range(kq):
                constraints[row, base + b : base + kp * kq : kq] = cells[:, b]
                row += 1

    return LinearSystem(design, constraints, delta, terms, layout, n)
