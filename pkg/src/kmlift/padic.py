"""Half-integral symmetric matrices over Z localized at a prime.

Provides the quadratic-form invariants (Hilbert symbol, Hasse invariant,
square classes, discriminant/conductor data), Jordan decomposition for odd
p, a canonicalized 2-adic symbol playing the role of the 2-adic canonical
form, equivalence testing, membership in the distinguished sublattice L'
with its witness vector, and complete enumeration of local classes by
bounded determinant valuation.

2-adic classes are represented by a *canonical symbol*: per scale, the
sorted odd diagonal units mod 8 plus the rank and type of the even part.
Equivalent forms can have different raw symbols; equivalence is generated
by a finite move set (same-scale unit rewrites, even-type toggles against a
unit twist, sign walking along trains, oddity transfer inside
compartments).  The canonical symbol is the lexicographic minimum over the
move orbit.  The move set is exercised against independent invariants and a
search oracle in the tests.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

Q = Fraction


# ---------------------------------------------------------------------------
# Rational p-adic utilities


def pval(x: Fraction, p: int) -> int:
    """p-adic valuation of a nonzero rational."""
    if x == 0:
        raise ValueError("valuation of zero")
    v = 0
    n = x.numerator
    while n % p == 0:
        n //= p
        v += 1
    d = x.denominator
    while d % p == 0:
        d //= p
        v -= 1
    return v


def punit(x: Fraction, p: int) -> Fraction:
    """The unit part x / p^v(x)."""
    return x / Q(p) ** pval(x, p)


def unit_mod(x: Fraction, p: int, modulus: int) -> int:
    """A p-adic unit (p-free numerator and denominator) reduced mod modulus."""
    num = x.numerator % modulus
    den = x.denominator % modulus
    return (num * pow(den, -1, modulus)) % modulus


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a/p) for odd p, a coprime to p."""
    r = pow(a % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


@lru_cache(maxsize=None)
def least_nonresidue(p: int) -> int:
    for a in range(2, p):
        if legendre(a, p) == -1:
            return a
    raise ValueError("no nonresidue found")


def chi_p(a, p: int) -> int:
    """1, -1, 0 according as Q_p(sqrt a) is Q_p, unramified, or ramified."""
    a = Q(a)
    if a == 0:
        raise ValueError("chi_p(0) undefined")
    v = pval(a, p)
    if v % 2 != 0:
        return 0
    u = punit(a, p)
    if p == 2:
        u8 = unit_mod(u, 2, 8)
        return {1: 1, 5: -1, 3: 0, 7: 0}[u8]
    return legendre(unit_mod(u, p, p), p)


def hilbert(a, b, p: int) -> int:
    """Hilbert symbol (a, b)_p over Q_p."""
    a, b = Q(a), Q(b)
    if a == 0 or b == 0:
        raise ValueError("Hilbert symbol needs nonzero arguments")
    al, be = pval(a, p), pval(b, p)
    u, v = punit(a, p), punit(b, p)
    if p != 2:
        res = 1
        if al % 2 == 1 and be % 2 == 1 and (p % 4) == 3:
            res = -res
        if be % 2 == 1:
            res *= legendre(unit_mod(u, p, p), p)
        if al % 2 == 1:
            res *= legendre(unit_mod(v, p, p), p)
        return res
    u8, v8 = unit_mod(u, 2, 8), unit_mod(v, 2, 8)
    eps_u, eps_v = ((u8 - 1) // 2) % 2, ((v8 - 1) // 2) % 2
    om_u, om_v = ((u8 * u8 - 1) // 8) % 2, ((v8 * v8 - 1) // 8) % 2
    e = eps_u * eps_v + al * om_v + be * om_u
    return -1 if e % 2 else 1


def kronecker_symbol(D: int, n: int) -> int:
    """Kronecker symbol (D/n) for n >= 1, D a discriminant (or 1)."""
    if n <= 0:
        raise ValueError("positive n only")
    result = 1
    while n % 2 == 0:
        n //= 2
        if D % 2 == 0:
            return 0
        if D % 8 in (3, 5):
            result = -result
    if n == 1:
        return result
    a, m = D % n, n
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if m % 8 in (3, 5):
                result = -result
        a, m = m % a, a
        if a % 4 == 3 and m % 4 == 3:
            result = -result
    return result if m == 1 else 0


# ---------------------------------------------------------------------------
# Half-integral matrices


class NotHalfIntegral(ValueError):
    pass


@dataclass(frozen=True)
class HalfIntMat:
    """Symmetric matrix with integral diagonal and half-integral off-diagonal."""

    rows: tuple  # tuple of tuples of Fraction

    @staticmethod
    def make(entries) -> "HalfIntMat":
        rows = tuple(tuple(Q(x) for x in row) for row in entries)
        m = len(rows)
        for r in rows:
            if len(r) != m:
                raise ValueError("matrix must be square")
        for i in range(m):
            for j in range(m):
                if rows[i][j] != rows[j][i]:
                    raise ValueError("matrix must be symmetric")
                if i == j and rows[i][i].denominator != 1:
                    raise NotHalfIntegral(f"diagonal entry {rows[i][i]} not integral")
                if i != j and (2 * rows[i][j]).denominator != 1:
                    raise NotHalfIntegral(f"entry {rows[i][j]} not half-integral")
        return HalfIntMat(rows)

    @staticmethod
    def raw(entries) -> "HalfIntMat":
        """Container constructor without the global half-integrality check.

        Used for p-local data whose entries are only p-adically integral.
        """
        rows = tuple(tuple(Q(x) for x in row) for row in entries)
        return HalfIntMat(rows)

    @staticmethod
    def diagonal(entries) -> "HalfIntMat":
        m = len(entries)
        return HalfIntMat.make(
            [[entries[i] if i == j else 0 for j in range(m)] for i in range(m)]
        )

    @staticmethod
    def empty() -> "HalfIntMat":
        return HalfIntMat(())

    @property
    def degree(self) -> int:
        return len(self.rows)

    def entry(self, i: int, j: int) -> Fraction:
        return self.rows[i][j]

    def det(self) -> Fraction:
        return _det(self.rows)

    def perp(self, other: "HalfIntMat") -> "HalfIntMat":
        m, l = self.degree, other.degree
        rows = []
        for i in range(m):
            rows.append(list(self.rows[i]) + [Q(0)] * l)
        for i in range(l):
            rows.append([Q(0)] * m + list(other.rows[i]))
        return HalfIntMat(tuple(tuple(r) for r in rows))

    def scale(self, c) -> "HalfIntMat":
        c = Q(c)
        return HalfIntMat(tuple(tuple(c * x for x in row) for row in self.rows))

    def transform(self, u_rows) -> "HalfIntMat":
        """U^t A U for U given as a list of rows (m x n)."""
        m = self.degree
        n = len(u_rows[0]) if u_rows else 0
        au = [[sum(self.rows[i][k] * Q(u_rows[k][j]) for k in range(m))
               for j in range(n)] for i in range(m)]
        res = [[sum(Q(u_rows[k][i]) * au[k][j] for k in range(m))
                for j in range(n)] for i in range(n)]
        return HalfIntMat(tuple(tuple(row) for row in res))

    def submatrix(self, idx) -> "HalfIntMat":
        return HalfIntMat(tuple(tuple(self.rows[i][j] for j in idx) for i in idx))

    def to_json(self):
        from .exactalg import frac_str
        return [[frac_str(x) for x in row] for row in self.rows]

    def __repr__(self):
        return "HalfIntMat[" + "; ".join(
            " ".join(str(x) for x in row) for row in self.rows) + "]"


def _det(rows) -> Fraction:
    m = len(rows)
    if m == 0:
        return Q(1)
    mat = [list(r) for r in rows]
    det = Q(1)
    for c in range(m):
        piv = None
        for r in range(c, m):
            if mat[r][c] != 0:
                piv = r
                break
        if piv is None:
            return Q(0)
        if piv != c:
            mat[c], mat[piv] = mat[piv], mat[c]
            det = -det
        det *= mat[c][c]
        inv = 1 / mat[c][c]
        for r in range(c + 1, m):
            f = mat[r][c] * inv
            if f:
                for cc in range(c, m):
                    mat[r][cc] -= f * mat[c][cc]
    return det


def is_p_halfintegral(A: HalfIntMat, p: int) -> bool:
    """p-local membership in L: diagonal in Z_p, off-diagonal in (1/2)Z_p."""
    for i in range(A.degree):
        for j in range(A.degree):
            x = A.entry(i, j)
            if x == 0:
                continue
            bound = 0 if (i == j or p != 2) else -1
            if pval(x, p) < bound:
                return False
    return True


def is_p_integral(A: HalfIntMat, p: int) -> bool:
    """p-local membership in S: all entries in Z_p."""
    return all(x == 0 or pval(x, p) >= 0 for row in A.rows for x in row)


def gram_eval(A: HalfIntMat, x) -> Fraction:
    """The quadratic form value A[x]."""
    m = A.degree
    total = Q(0)
    for i in range(m):
        total += A.rows[i][i] * x[i] * x[i]
        for j in range(i + 1, m):
            total += 2 * A.rows[i][j] * x[i] * x[j]
    return total


# ---------------------------------------------------------------------------
# Hasse invariant


def _diagonalize_rational(A: HalfIntMat):
    """Diagonal entries of a Q-congruent diagonal form (exact)."""
    mat = [list(row) for row in A.rows]
    diag = []
    while mat:
        n = len(mat)
        pos = None
        for i in range(n):
            if mat[i][i] != 0:
                pos = i
                break
        if pos is None:
            found = None
            for i in range(n):
                for j in range(i + 1, n):
                    if mat[i][j] != 0:
                        found = (i, j)
                        break
                if found:
                    break
            if found is None:
                raise ValueError("singular matrix in Hasse computation")
            i, j = found
            for k in range(n):
                mat[i][k] += mat[j][k]
            for k in range(n):
                mat[k][i] += mat[k][j]
            pos = i
        if pos != 0:
            mat[0], mat[pos] = mat[pos], mat[0]
            for row in mat:
                row[0], row[pos] = row[pos], row[0]
        a = mat[0][0]
        diag.append(a)
        mat = [[mat[i][j] - mat[i][0] * mat[0][j] / a for j in range(1, n)]
               for i in range(1, n)]
    return diag


def hasse(A: HalfIntMat, p: int) -> int:
    """Hasse invariant prod_{i<=j} (a_i, a_j)_p over a diagonalization."""
    if A.degree == 0:
        return 1
    if A.det() == 0:
        raise ValueError("Hasse invariant requires a nondegenerate matrix")
    diag = _diagonalize_rational(A)
    eps = 1
    for i in range(len(diag)):
        for j in range(i, len(diag)):
            eps *= hilbert(diag[i], diag[j], p)
    return eps


# ---------------------------------------------------------------------------
# Block decomposition over Z_p


def block_decompose(A: HalfIntMat, p: int):
    """Split A over Z_p into 1x1 and (p = 2 only) 2x2 scaled-unimodular blocks.

    Returns (grams, u) where grams is the list of block Gram matrices and u
    the change of basis (list of rows, columns = new basis vectors, entries
    p-integral) with A[u] = perp of the blocks in order.
    """
    m = A.degree
    work = [list(row) for row in A.rows]
    u = [[Q(1) if i == j else Q(0) for j in range(m)] for i in range(m)]
    active = list(range(m))
    blocks = []

    while active:
        best = None
        for i in active:
            x = work[i][i]
            if x != 0:
                v = pval(x, p)
                if best is None or v < best[0]:
                    best = (v, "diag", i, i)
        for ai in range(len(active)):
            for aj in range(ai + 1, len(active)):
                i, j = active[ai], active[aj]
                x = work[i][j]
                if x != 0:
                    v = pval(x, p)
                    if best is None or v < best[0]:
                        best = (v, "off", i, j)
        if best is None:
            raise ValueError("degenerate form in block decomposition")
        v, kind, i, j = best
        if kind == "off" and p != 2:
            for k in range(m):
                u[k][i] += u[k][j]
            for k in range(m):
                work[i][k] += work[j][k]
            for k in range(m):
                work[k][i] += work[k][j]
            continue
        if kind == "diag":
            a = work[i][i]
            others = [k for k in active if k != i]
            for k in others:
                f = work[i][k] / a
                if f:
                    for r in range(m):
                        u[r][k] -= f * u[r][i]
                    for c in range(m):
                        work[k][c] -= f * work[i][c]
                    for r in range(m):
                        work[r][k] -= f * work[r][i]
            blocks.append(("d", [i]))
            active = others
        else:
            a, b, c = work[i][i], work[i][j], work[j][j]
            det2 = a * c - b * b
            others = [k for k in active if k not in (i, j)]
            for k in others:
                x, y = work[i][k], work[j][k]
                s = (c * x - b * y) / det2
                t = (a * y - b * x) / det2
                if s or t:
                    for r in range(m):
                        u[r][k] -= s * u[r][i] + t * u[r][j]
                    for cc in range(m):
                        work[k][cc] -= s * work[i][cc] + t * work[j][cc]
                    for r in range(m):
                        work[r][k] -= s * work[r][i] + t * work[r][j]
            blocks.append(("e", [i, j]))
            active = others

    grams = []
    order = []
    for kind, idx in blocks:
        order.extend(idx)
        if kind == "d":
            grams.append(HalfIntMat.raw([[work[idx[0]][idx[0]]]]))
        else:
            i, j = idx
            grams.append(HalfIntMat.raw([[work[i][i], work[i][j]],
                                         [work[i][j], work[j][j]]]))
    u_reordered = [[u[r][c] for c in order] for r in range(m)]
    return grams, u_reordered


# ---------------------------------------------------------------------------
# Jordan form, odd p


@dataclass(frozen=True)
class JordanForm:
    """Canonical odd-p Jordan data: ((scale, rank, det_class), ...)."""

    p: int
    blocks: tuple

    def rep(self) -> HalfIntMat:
        entries = []
        for e, n, cls in self.blocks:
            scale = Q(self.p) ** e
            units = [1] * (n - 1) + [1 if cls == 1 else least_nonresidue(self.p)]
            entries.extend(scale * x for x in units)
        return HalfIntMat.diagonal(entries)


def jordan_decompose(A: HalfIntMat, p: int) -> JordanForm:
    """Jordan canonical data of A over Z_p (p odd)."""
    if p == 2:
        raise ValueError("use the 2-adic symbol for p = 2")
    grams, _ = block_decompose(A, p)
    per_scale: dict = {}
    for g in grams:
        a = g.entry(0, 0)
        e = pval(a, p)
        cls = legendre(unit_mod(punit(a, p), p, p), p)
        n, c = per_scale.get(e, (0, 1))
        per_scale[e] = (n + 1, c * cls)
    blocks = tuple((e, n, cls) for e, (n, cls) in sorted(per_scale.items()))
    return JordanForm(p, blocks)


# ---------------------------------------------------------------------------
# 2-adic symbols
#
# Raw symbol: tuple of per-scale entries (j, units, m, d) where j is the
# integer Jordan scale:
#   units = sorted tuple of odd diagonal units mod 8 (entries 2^j u),
#   m     = rank of the even part 2^j H / 2^j Y blocks (off-diagonal
#           valuation j; j = -1 holds the genuinely half-integral planes),
#   d     = 1 or 5: the even part is (m/2) hyperbolic planes for d = 1,
#           one anisotropic plane among them for d = 5 (d = 1 when m = 0).
# A constituent with units is type I, one with only an even part type II.
# Type I constituents absorb their even planes when normalized (H gives
# units {1,7}, Y gives {1,3}); the normalized per-scale data is units-only
# or planes-only.


@lru_cache(maxsize=None)
def _unit_multiset_table(k: int):
    """(det mod 8, trace mod 8) -> canonical sorted unit tuple of length k."""
    table: dict = {}
    for combo in itertools.combinations_with_replacement((1, 3, 5, 7), k):
        det, tr = 1, 0
        for c in combo:
            det = det * c % 8
            tr = (tr + c) % 8
        key = (det, tr)
        if key not in table or combo < table[key]:
            table[key] = combo
    return table


def _units_invariants(units):
    det, tr = 1, 0
    for c in units:
        det = det * c % 8
        tr = (tr + c) % 8
    return det, tr


def _canon_units(units) -> tuple:
    if not units:
        return ()
    return _unit_multiset_table(len(units))[_units_invariants(units)]


def symbol2_from_blocks(block_list) -> tuple:
    """Raw symbol from items ('odd', scale, unit8) / ('even', scale, 'H'|'Y')."""
    per_scale: dict = {}
    for item in block_list:
        if item[0] == "odd":
            _, sc, u8 = item
            units, me, de = per_scale.get(sc, ((), 0, 1))
            per_scale[sc] = (tuple(sorted(units + (u8,))), me, de)
        else:
            _, sc, typ = item
            units, me, de = per_scale.get(sc, ((), 0, 1))
            de = de * (1 if typ == "H" else 5) % 8
            per_scale[sc] = (units, me + 2, 5 if de == 5 else 1)
    out = []
    for sc in sorted(per_scale):
        units, me, de = per_scale[sc]
        out.append((sc, _canon_units(units), me, de))
    return tuple(out)


def symbol2(A: HalfIntMat) -> tuple:
    """Raw 2-adic symbol of A (integer Jordan scales)."""
    grams, _ = block_decompose(A, 2)
    items = []
    for g in grams:
        if g.degree == 1:
            a = g.entry(0, 0)
            items.append(("odd", pval(a, 2), unit_mod(punit(a, 2), 2, 8)))
        else:
            b = g.entry(0, 1)
            mu = pval(b, 2)
            detu = g.det() / Q(2) ** (2 * mu)
            u8 = unit_mod(detu, 2, 8)
            if u8 == 7:
                items.append(("even", mu, "H"))
            elif u8 == 3:
                items.append(("even", mu, "Y"))
            else:
                raise ValueError("even block with impossible determinant class")
    return symbol2_from_blocks(items)


def absorb_even(sym) -> tuple:
    """Normalize: type I constituents swallow their even planes.

    A constituent with an odd unit is diagonalizable; absorbing its even
    part multiplies the odd-part determinant class by det Theta_{m,d} =
    (-1)^(m/2) d and leaves the oddity (trace class) unchanged.
    """
    out = []
    for sc, units, m, d in sym:
        if units and m:
            det, tr = _units_invariants(units)
            det = det * ((-1) ** (m // 2) * d) % 8
            new_units = _unit_multiset_table(len(units) + m).get((det, tr))
            if new_units is None:
                raise ValueError("unrealizable absorption; move set defect")
            out.append((sc, new_units, 0, 1))
        else:
            out.append((sc, units, m, d))
    return tuple(out)


def _eps_of_det(det8: int) -> int:
    return 1 if det8 in (1, 7) else -1


# Canonical data: (profile, signs, comp_data) where
#   profile  = tuple of (scale, 'I', rank) / (scale, 'II', rank) entries,
#   signs    = tuple over the same entries: eps (type I) or d in {1,5},
#   comp_data= tuple over compartments of (D mod 8, T mod 8).
# Compartments and trains depend only on the profile.


def _data_from_absorbed(sym):
    profile = []
    signs = []
    for sc, units, m, d in sym:
        if units:
            det, _tr = _units_invariants(units)
            profile.append((sc, "I", len(units)))
            signs.append(_eps_of_det(det))
        else:
            profile.append((sc, "II", m))
            signs.append(d)
    profile = tuple(profile)
    emap = {e[0]: e for e in profile}
    comps = []
    scales = sorted(emap)
    cur = []
    for sc in range(scales[0], scales[-1] + 1) if scales else []:
        e = emap.get(sc)
        if e is not None and e[1] == "I":
            cur.append(sc)
        else:
            if cur:
                comps.append(tuple(cur))
            cur = []
    if cur:
        comps.append(tuple(cur))
    unit_map = {sc: units for sc, units, m, d in sym}
    comp_data = []
    for comp in comps:
        D, T = 1, 0
        for sc in comp:
            det, tr = _units_invariants(unit_map[sc])
            D = D * det % 8
            T = (T + tr) % 8
        comp_data.append((D, T))
    return (profile, tuple(signs), tuple(comps), tuple(comp_data))


def _trains_of_profile(profile):
    emap = {e[0]: e for e in profile}
    if not emap:
        return []
    scales = sorted(emap)
    lo, hi = scales[0], scales[-1]
    trains = []
    cur = [lo]
    for sc in range(lo, hi):
        a, b = emap.get(sc), emap.get(sc + 1)
        joined = (a is not None and a[1] == "I") or (b is not None and b[1] == "I")
        if joined:
            if b is not None:
                cur.append(sc + 1)
        else:
            if cur:
                trains.append(tuple(cur))
            cur = [sc + 1] if b is not None else []
    if cur:
        trains.append(tuple(cur))
    return [t for t in trains if t]


def _walk_neighbors(state, profile, comps, trains):
    """States reachable by one sign walk (flip two scales of a train)."""
    signs, comp_data = state
    emap = {e[0]: (i, e) for i, e in enumerate(profile)}
    comp_of = {}
    for ci, comp in enumerate(comps):
        for sc in comp:
            comp_of[sc] = ci
    out = []
    for train in trains:
        occupied = [sc for sc in train if sc in emap]
        for i, j in zip(occupied, occupied[1:]):
            new_signs = list(signs)
            new_comp = list(comp_data)
            touched = set()
            for sc in (i, j):
                idx, entry = emap[sc]
                if entry[1] == "II":
                    if entry[2] == 0:
                        continue
                    new_signs[idx] = 1 if new_signs[idx] == 5 else 5
                else:
                    new_signs[idx] = -new_signs[idx]
                    ci = comp_of[sc]
                    D, T = new_comp[ci]
                    new_comp[ci] = (D * 5 % 8, T)
                    touched.add(ci)
            for ci in touched:
                D, T = new_comp[ci]
                new_comp[ci] = (D, (T + 4) % 8)
            out.append((tuple(new_signs), tuple(new_comp)))
    return out


@lru_cache(maxsize=None)
def canonical_symbol2_from_raw(sym: tuple) -> tuple:
    """Canonical 2-adic class key from a raw symbol."""
    sym = absorb_even(sym)
    profile, signs, comps, comp_data = _data_from_absorbed(sym)
    trains = _trains_of_profile(profile)
    start = (signs, comp_data)
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for st in frontier:
            for t in _walk_neighbors(st, profile, comps, trains):
                if t not in seen:
                    seen.add(t)
                    nxt.append(t)
        frontier = nxt
    best = min(seen)
    return (profile, best[0], best[1])


def canonical_symbol2(A: HalfIntMat) -> tuple:
    return canonical_symbol2_from_raw(symbol2(A))


_H_BLOCK = ((Q(0), Q(1)), (Q(1), Q(0)))
_Y_BLOCK = ((Q(2), Q(1)), (Q(1), Q(2)))


def symbol2_rep(sym) -> HalfIntMat:
    """A representative matrix with the given raw 2-adic symbol."""
    out = HalfIntMat.empty()
    for sc, units, m, d in sym:
        scale = Q(2) ** sc
        for u in units:
            out = out.perp(HalfIntMat.raw([[scale * u]]))
        n_h = m // 2 - (1 if d == 5 else 0)
        for _ in range(n_h):
            out = out.perp(HalfIntMat.raw(
                [[scale * x for x in row] for row in _H_BLOCK]))
        if d == 5 and m:
            out = out.perp(HalfIntMat.raw(
                [[scale * x for x in row] for row in _Y_BLOCK]))
    return out


# ---------------------------------------------------------------------------
# Equivalence


def zp_equivalent(A: HalfIntMat, B: HalfIntMat, p: int) -> bool:
    """GL_m(Z_p)-equivalence of nondegenerate half-integral matrices."""
    if A.degree != B.degree:
        return False
    if p == 2:
        return canonical_symbol2(A) == canonical_symbol2(B)
    return jordan_decompose(A, p) == jordan_decompose(B, p)


def equivalent_mod_search(A: HalfIntMat, B: HalfIntMat, p: int, level: int,
                          cap: int = 500000) -> bool:
    """Search for U with A[U] = B modulo p^level (graded at p = 2).

    Exhaustive lifting search over U mod p^level; exact but exponential,
    intended as a small-case oracle for the tests (degree <= 3).
    """
    m = A.degree
    if m != B.degree:
        return False
    ea = [[int(2 * A.entry(i, j)) for j in range(m)] for i in range(m)]
    eb = [[int(2 * B.entry(i, j)) for j in range(m)] for i in range(m)]

    def residual_ok(u_flat, k):
        mod_off = p ** k if p != 2 else 2 ** (k + 1)
        mod_diag = p ** k if p != 2 else 2 ** (k + 2)
        for i in range(m):
            for j in range(i, m):
                s = 0
                for r in range(m):
                    uri = u_flat[r * m + i]
                    if uri == 0:
                        continue
                    for c in range(m):
                        s += uri * ea[r][c] * u_flat[c * m + j]
                s -= eb[i][j]
                if i == j:
                    if s % mod_diag:
                        return False
                else:
                    if s % mod_off:
                        return False
        return True

    cands = [list(bits) for bits in itertools.product(range(p), repeat=m * m)
             if residual_ok(bits, 1)]
    for k in range(1, level):
        mod = p ** k
        nxt = []
        for u in cands:
            for delta in itertools.product(range(p), repeat=m * m):
                u2 = [u[i] + mod * delta[i] for i in range(m * m)]
                if residual_ok(u2, k + 1):
                    nxt.append(u2)
                    if len(nxt) > cap:
                        raise RuntimeError("oracle search blow-up")
        if not nxt:
            return False
        cands = nxt
    return True


def repr_counts(A: HalfIntMat, level: int, p: int = 2):
    """Counts #{x mod p^level : 2A[x] = c mod p^level} for every residue c.

    A cheap provable invariant battery used to certify inequivalence in the
    tests (computed on the doubled form to keep everything integral).
    """
    m = A.degree
    mod = p ** level
    counts = [0] * mod
    ea = [[int(2 * A.entry(i, j)) for j in range(m)] for i in range(m)]
    for x in itertools.product(range(mod), repeat=m):
        s = 0
        for i in range(m):
            s += ea[i][i] * x[i] * x[i]
            for j in range(i + 1, m):
                s += 2 * ea[i][j] * x[i] * x[j]
        counts[s % mod] += 1
    return tuple(counts)


# ---------------------------------------------------------------------------
# Discriminant / conductor invariants


def squarefree_decompose(n: int):
    """n = s * f^2 with s squarefree."""
    sign = -1 if n < 0 else 1
    n = abs(n)
    s, f = 1, 1
    d = 2
    while d * d <= n:
        e = 0
        while n % d == 0:
            n //= d
            e += 1
        if e:
            f *= d ** (e // 2)
            if e % 2:
                s *= d
        d += 1
    s *= n
    return sign * s, f


def fundamental_decompose(D: int):
    """D = d * f^2 with d a fundamental discriminant (needs D = 0, 1 mod 4)."""
    if D == 0 or D % 4 not in (0, 1):
        raise ValueError("not a discriminant")
    s, f = squarefree_decompose(D)
    if s % 4 == 1:
        return s, f
    return 4 * s, f // 2


def frak_invariants(T: HalfIntMat):
    """(d_T, f_T) for D = (-1)^(n/2) det(2T), even degree n."""
    n = T.degree
    if n % 2 != 0:
        raise ValueError("frak invariants need even degree")
    D = T.scale(2).det() * (-1) ** (n // 2)
    if D.denominator != 1:
        raise ValueError("det(2T) not integral")
    return fundamental_decompose(int(D))


def d0_local(D, p: int):
    """Split a discriminant locally: D ~ d0 * p^(2e) modulo unit squares.

    Returns ((val, unit), e) where (val, unit) is the canonical local class
    key: odd p has val in {0,1} and unit in {1, nonresidue}; p = 2 has
    val in {0, 2, 3} with unit mod 8 constrained as in the set F_2.
    """
    D = Q(D)
    v = pval(D, p)
    u = punit(D, p)
    if p != 2:
        cls = 1 if legendre(unit_mod(u, p, p), p) == 1 else least_nonresidue(p)
        return ((v % 2, cls), v // 2)
    u8 = unit_mod(u, 2, 8)
    if v % 2 == 0:
        if u8 % 4 == 1:
            return ((0, u8), v // 2)
        if v < 2:
            raise ValueError("discriminant is not 0 or 1 mod 4 at p = 2")
        return ((2, u8), (v - 2) // 2)
    if v < 3:
        raise ValueError("discriminant is not 0 or 1 mod 4 at p = 2")
    return ((3, u8), (v - 3) // 2)


def d0_value(p: int, key) -> int:
    """An integer representative of the local class key."""
    val, unit = key
    return (p ** val) * unit


def d0_representatives(p: int):
    """Pinned representatives of F_p modulo unit squares."""
    if p != 2:
        np_ = least_nonresidue(p)
        return [(0, 1), (0, np_), (1, 1), (1, np_)]
    return [(0, 1), (0, 5), (2, 3), (2, 7), (3, 1), (3, 3), (3, 5), (3, 7)]


def chi_of_d0(p: int, key) -> int:
    return chi_p(Q(d0_value(p, key)), p)


def frak_e_p(T: HalfIntMat, p: int) -> int:
    """Local conductor exponent nu_p(f_T)."""
    n = T.degree
    D = T.scale(2).det() * (-1) ** (n // 2)
    return d0_local(D, p)[1]


def frak_d_class(T: HalfIntMat, p: int):
    """Canonical local class key of the fundamental discriminant of T."""
    n = T.degree
    D = T.scale(2).det() * (-1) ** (n // 2)
    return d0_local(D, p)[0]


# ---------------------------------------------------------------------------
# L' membership, the degree m+1 lift


def in_L_prime(A: HalfIntMat, p: int = 2):
    """A witness r (entries 0/1) with A = -r^t r mod 4L, or None.

    For odd p every A admits the trivial witness; the congruence condition
    is a genuine restriction only at p = 2.
    """
    m = A.degree
    if p != 2:
        return tuple(0 for _ in range(m))
    for r in itertools.product((0, 1), repeat=m):
        good = True
        for i in range(m):
            if (A.entry(i, i) + r[i] * r[i]) % 4 != 0:
                good = False
                break
            for j in range(i + 1, m):
                x = A.entry(i, j) + r[i] * r[j]
                if x.denominator != 1 or x.numerator % 2 != 0:
                    good = False
                    break
            if not good:
                break
        if good:
            return r
    return None


def t_one(A: HalfIntMat, r=None) -> HalfIntMat:
    """The degree m+1 lift [[1, r/2], [r^t/2, (r^t r + A)/4]]."""
    if r is None:
        r = in_L_prime(A, 2)
        if r is None:
            raise ValueError("matrix is not in L'")
    m = A.degree
    rows = [[Q(1)] + [Q(ri, 2) for ri in r]]
    for i in range(m):
        rows.append([Q(r[i], 2)] + [(A.entry(i, j) + r[i] * r[j]) / 4
                                    for j in range(m)])
    return HalfIntMat.make(rows)


def lemma31_split(A: HalfIntMat):
    """Split A in L'_{m,2}: ('even', B, None) with A ~ 4B over Z_2 or
    ('odd', a, B) with A ~ a perp 4B, a = -1 mod 4."""
    grams, _ = block_decompose(A, 2)
    odd0 = [k for k, g in enumerate(grams)
            if g.degree == 1 and pval(g.entry(0, 0), 2) == 0]
    if len(odd0) > 1:
        raise ValueError("not an L' matrix (odd unimodular rank > 1)")
    rest = [g for k, g in enumerate(grams) if k not in odd0]
    B = HalfIntMat.empty()
    for g in rest:
        B = B.perp(g.scale(Q(1, 4)))
    if not is_p_halfintegral(B, 2):
        raise ValueError("not an L' matrix (quarter part not half-integral)")
    if not odd0:
        return ("even", B, None)
    a = grams[odd0[0]].entry(0, 0)
    if a % 4 != 3:
        raise ValueError("not an L' matrix (unit not -1 mod 4)")
    return ("odd", a, B)


def t_one_local(A: HalfIntMat, p: int) -> HalfIntMat:
    """A Z_p-representative of the GL_{m+1}(Z_p)-class of the lift A^(1)."""
    if p != 2:
        return HalfIntMat.make([[1]]).perp(A)
    kind, x, y = lemma31_split(A)
    if kind == "even":
        return HalfIntMat.make([[1]]).perp(x)
    head = HalfIntMat.make([[1, Q(1, 2)], [Q(1, 2), Q(x + 1, 4)]])
    return head.perp(y)


# ---------------------------------------------------------------------------
# Standard unimodular blocks and the radical invariant


def theta_standard(l: int, d: int, p: int) -> HalfIntMat:
    """Theta_{l,d} (p odd, unimodular diagonal) or (1/2)Theta_{l,d} (p = 2).

    l = 0 gives the empty matrix; for p = 2, l must be even and d in {1,5}.
    """
    if l == 0:
        return HalfIntMat.empty()
    if p != 2:
        if legendre(d % p, p) == 0:
            raise ValueError("d must be a unit")
        target = ((-1) ** ((l + 1) // 2)) * d
        u = 1 if legendre(target % p, p) == 1 else least_nonresidue(p)
        return HalfIntMat.diagonal([1] * (l - 1) + [u])
    if l % 2 != 0 or d not in (1, 5):
        raise ValueError("p = 2 requires even rank and d in {1, 5}")
    half_h = [[0, Q(1, 2)], [Q(1, 2), 0]]
    half_y = [[1, Q(1, 2)], [Q(1, 2), 1]]
    out = HalfIntMat.empty()
    for _ in range(l // 2 - (1 if d == 5 else 0)):
        out = out.perp(HalfIntMat.make(half_h))
    if d == 5:
        out = out.perp(HalfIntMat.make(half_y))
    return out


def split_type_2adic(B: HalfIntMat):
    """Classify B in L^(1)_{n-1,2} as 2Theta perp B_1 of type I/II/III.

    Returns (typ, n1, a_unit, theta_det) with typ in {1,2,3}, n1 as in the
    closed G-formulas, a_unit the scale-0 odd unit (None for type II) and
    theta_det = det of the even-unimodular Theta collecting the scale "1"
    part of the integral normalization (1 when empty).
    """
    sym = symbol2(B)
    emap = {sc: (units, m, d) for sc, units, m, d in sym}
    units0, m0, _ = emap.get(0, ((), 0, 1))
    units1, m1, d1 = emap.get(1, ((), 0, 1))
    if m0 != 0 or len(units0) > 1 or units1:
        raise ValueError("not an L' structure at 2")
    theta_det = ((-1) ** (m1 // 2) * d1) % 8 if m1 else 1
    units2 = emap.get(2, ((), 0, 1))[0]
    high = sum(len(units) + m for sc, units, m, d in sym if sc >= 2)
    if units0:
        a = units0[0]
        if a % 4 != 3:
            raise ValueError("not an L' structure at 2 (unit not -1 mod 4)")
        if units2:
            return (3, high, a, theta_det)
        return (1, high, a, theta_det)
    n1 = high - 1
    if n1 < 0:
        raise ValueError("empty high part in type II split")
    return (2, n1, None, theta_det)


def type_classify_2(B: HalfIntMat) -> int:
    return split_type_2adic(B)[0]


def xi_bar_1(B: HalfIntMat, p: int, n: int) -> int:
    """The radical invariant xi-bar^(1)(B) for B in L^(1)_{n-1,p}."""
    if p == 2:
        typ, n1, a, theta_det = split_type_2adic(B)
        if typ in (2, 3):
            return 0
        return chi_p(Q(((-1) ** ((n - n1) // 2)) * a * theta_det), 2)
    jf = jordan_decompose(B, p)
    n1 = sum(r for e, r, cls in jf.blocks if e >= 1)
    if n1 % 2 != 0:
        return 0
    det_theta_cls = 1
    for e, r, cls in jf.blocks:
        if e == 0:
            det_theta_cls *= cls
    sign_cls = legendre(((-1) ** ((n - n1) // 2)) % p, p)
    return sign_cls * det_theta_cls


# ---------------------------------------------------------------------------
# Class enumeration


@dataclass(frozen=True, eq=False)
class PadicClass:
    """A GL_m(Z_p)-class: canonical key plus a pinned representative."""

    p: int
    key: tuple
    rep: HalfIntMat

    def __eq__(self, other):
        return isinstance(other, PadicClass) and (self.p, self.key) == (other.p, other.key)

    def __hash__(self):
        return hash((self.p, self.key))

    @property
    def degree(self) -> int:
        return self.rep.degree

    def det_valuation(self) -> int:
        return pval(self.rep.det(), self.p)


def classify(A: HalfIntMat, p: int) -> PadicClass:
    if p == 2:
        return PadicClass(2, canonical_symbol2(A), A)
    return PadicClass(p, jordan_decompose(A, p).blocks, A)


def _odd_shapes(m: int, budget: int):
    """Odd-p shapes: tuples of (scale, rank, cls) with sum scale*rank <= budget."""

    def rec(start_scale, remaining_rank, remaining_budget):
        if remaining_rank == 0:
            yield ()
            return
        max_scale = remaining_budget if start_scale <= remaining_budget else -1
        for sc in range(start_scale, max_scale + 1):
            for rank in range(1, remaining_rank + 1):
                if sc * rank > remaining_budget:
                    break
                for cls in (1, -1):
                    for rest in rec(sc + 1, remaining_rank - rank,
                                    remaining_budget - sc * rank):
                        yield ((sc, rank, cls),) + rest

    yield from rec(0, m, budget)


def _symbols2_all(m: int, max_det_val: int, min_even_scale: int):
    """Raw 2-adic symbols of rank m with nu_2(det) <= max_det_val."""

    def entry_options(sc, remaining):
        # normalized entries: either units only (type I) or planes only
        opts = []
        for k in range(1, remaining + 1):
            if sc < 0:
                break
            for uo in sorted(set(_unit_multiset_table(k).values())):
                opts.append((k, 0, 1, uo, sc * k))
        for me in range(2, remaining + 1, 2):
            if sc < min_even_scale:
                break
            for de in (1, 5):
                opts.append((0, me, de, (), sc * me))
        return opts

    def rec(sc, remaining, val_used, acc):
        if remaining == 0:
            yield tuple(acc)
            return
        # every remaining rank unit at scales >= sc weighs at least sc
        if val_used + sc * remaining > max_det_val:
            return
        yield from rec(sc + 1, remaining, val_used, acc)
        for k, me, de, uo, w in entry_options(sc, remaining):
            if val_used + w + sc * (remaining - k - me) > max_det_val:
                continue
            acc.append((sc, uo, me, de))
            yield from rec(sc + 1, remaining - k - me, val_used + w, acc)
            acc.pop()

    yield from rec(min(0, min_even_scale), m, 0, [])


def enumerate_padic_classes(m: int, p: int, max_det_val: int,
                            integral_only: bool = True):
    """All GL_m(Z_p)-classes of half-integral forms with nu_p(det) bounded.

    The bound is on nu_p(det B).  For p = 2, integral_only restricts to
    integral symmetric matrices (the default; even parts then have scale
    >= 1); otherwise genuinely half-integral classes are included and
    nu_2(det B) >= -m can be negative.
    """
    if p != 2:
        out = []
        for shape in _odd_shapes(m, max_det_val):
            jf = JordanForm(p, tuple(sorted(shape)))
            out.append(PadicClass(p, jf.blocks, jf.rep()))
        return sorted(out, key=lambda c: (c.det_valuation(), c.key))

    seen = {}
    min_even_scale = 0 if integral_only else -1
    for sym in _symbols2_all(m, max_det_val, min_even_scale):
        symc = tuple(sorted(sym))
        key = canonical_symbol2_from_raw(symc)
        if key not in seen:
            seen[key] = PadicClass(2, key, symbol2_rep(symc))
    return sorted(seen.values(), key=lambda c: (c.det_valuation(), c.key))
