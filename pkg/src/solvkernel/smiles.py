"""Restricted SMILES reader: tokenize, parse, and perceive a heavy-atom graph.

Supported: organic-subset atoms ``C N O P S F Cl Br I``, aromatic ``c n o s``,
bracket atoms with charge and hydrogen count, bonds ``- = # :``, branches,
and ring closures ``1``-``9`` / ``%nn``. Stereo marks, isotopes, wildcards and
dot-disconnected components are rejected.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .errors import (
    ConflictingRingBondOrder,
    IllegalCharacter,
    MalformedBracket,
    SmilesError,
    UnbalancedParentheses,
    UnclosedRingBond,
    UnsupportedElement,
    ValenceExceeded,
)
from .molgraph import EdgeLabel, MolecularGraph, RadiiTable, VertexLabel, edge_length

ORGANIC = ("Cl", "Br", "C", "N", "O", "P", "S", "F", "I")
AROMATIC = ("c", "n", "o", "s")
BRACKET_ELEMENTS = ("Cl", "Br", "C", "N", "O", "P", "S", "F", "I", "H") + AROMATIC
BOND_SYMBOLS = {"-": "single", "=": "double", "#": "triple", ":": "aromatic"}
VALENCES = {
    "C": (4,), "N": (3, 5), "O": (2,), "P": (3, 5), "S": (2, 4, 6),
    "F": (1,), "Cl": (1,), "Br": (1,), "I": (1,), "H": (1,),
}
ORDER_VALUE = {"single": 1.0, "double": 2.0, "triple": 3.0, "aromatic": 1.5}

_BRACKET_RE = re.compile(
    r"^(?P<el>Cl|Br|[CNOPSFIH]|[cnos])"
    r"(?:(?P<h1>H\d?)(?P<c1>[+-](?:\d+|[+-]*))?|(?P<c2>[+-](?:\d+|[+-]*))(?P<h2>H\d?)?)?$"
)
# element-like words that are valid SMILES but outside the supported set
_OTHER_ELEMENT_RE = re.compile(r"^[A-Z][a-z]?|^[a-z]{1,2}")


@dataclass(frozen=True)
class SmilesToken:
    kind: str  # atom-organic | atom-bracket | bond | branch-open | branch-close | ring-digit | ring-two-digit
    start: int
    end: int
    text: str
    element: str | None = None
    aromatic: bool = False
    charge: int = 0
    hcount: int | None = None
    bond: str | None = None
    ring: int | None = None


@dataclass(frozen=True)
class RawAtom:
    element: str
    aromatic: bool
    bracket: bool
    charge: int = 0
    hcount: int | None = None


@dataclass(frozen=True)
class RawBond:
    i: int
    j: int
    symbol: str  # single | double | triple | aromatic | implicit


@dataclass(frozen=True)
class RawMolecule:
    atoms: tuple[RawAtom, ...]
    bonds: tuple[RawBond, ...]


def _parse_charge(text: str | None) -> int:
    if not text:
        return 0
    sign = 1 if text[0] == "+" else -1
    rest = text[1:]
    if rest.isdigit():
        return sign * int(rest)
    if rest and set(rest) != {text[0]}:
        raise MalformedBracket(f"bad charge {text!r}")
    return sign * len(text)


def _bracket_token(smiles: str, start: int) -> SmilesToken:
    end = smiles.find("]", start)
    if end < 0:
        raise MalformedBracket(f"unterminated bracket atom at position {start}")
    body = smiles[start + 1:end]
    m = _BRACKET_RE.match(body)
    if m is None:
        if any(ch in body for ch in "@/\\"):
            raise IllegalCharacter(f"stereo marks are not supported: [{body}]")
        if body[:1].isdigit():
            raise MalformedBracket(f"isotopes are not supported: [{body}]")
        w = _OTHER_ELEMENT_RE.match(body)
        if w and w.group(0) not in BRACKET_ELEMENTS:
            raise UnsupportedElement(f"element {w.group(0)!r} in [{body}]")
        raise MalformedBracket(f"cannot read bracket atom [{body}]")
    h = m.group("h1") or m.group("h2")
    hcount = 0 if h is None else (int(h[1:]) if len(h) > 1 else 1)
    el = m.group("el")
    return SmilesToken(
        "atom-bracket", start, end + 1, smiles[start:end + 1],
        element=el.capitalize() if el in AROMATIC else el,
        aromatic=el in AROMATIC,
        charge=_parse_charge(m.group("c1") or m.group("c2")),
        hcount=hcount,
    )


def tokenize(smiles: str) -> list[SmilesToken]:
    """Split a SMILES string into tokens whose texts concatenate back to the input."""
    if not smiles:
        raise SmilesError("empty SMILES")
    if not smiles.isascii():
        raise IllegalCharacter("SMILES must be ASCII")
    tokens = []
    i, n = 0, len(smiles)
    while i < n:
        ch = smiles[i]
        two = smiles[i:i + 2]
        if two in ("Cl", "Br"):
            tokens.append(SmilesToken("atom-organic", i, i + 2, two, element=two))
            i += 2
        elif ch in "CNOPSFI":
            tokens.append(SmilesToken("atom-organic", i, i + 1, ch, element=ch))
            i += 1
        elif ch in AROMATIC:
            tokens.append(SmilesToken("atom-organic", i, i + 1, ch,
                                      element=ch.upper(), aromatic=True))
            i += 1
        elif ch == "[":
            tok = _bracket_token(smiles, i)
            tokens.append(tok)
            i = tok.end
        elif ch in BOND_SYMBOLS:
            tokens.append(SmilesToken("bond", i, i + 1, ch, bond=BOND_SYMBOLS[ch]))
            i += 1
        elif ch == "(":
            tokens.append(SmilesToken("branch-open", i, i + 1, ch))
            i += 1
        elif ch == ")":
            tokens.append(SmilesToken("branch-close", i, i + 1, ch))
            i += 1
        elif ch.isdigit():
            tokens.append(SmilesToken("ring-digit", i, i + 1, ch, ring=int(ch)))
            i += 1
        elif ch == "%":
            digits = smiles[i + 1:i + 3]
            if len(digits) != 2 or not digits.isdigit():
                raise IllegalCharacter(f"'%' must be followed by two digits at position {i}")
            tokens.append(SmilesToken("ring-two-digit", i, i + 3, smiles[i:i + 3],
                                      ring=int(digits)))
            i += 3
        elif ch.isalpha():
            raise UnsupportedElement(f"element starting {smiles[i:i + 2]!r} at position {i}")
        else:
            raise IllegalCharacter(f"character {ch!r} at position {i}")
    return tokens


def render(tokens: Sequence[SmilesToken]) -> str:
    return "".join(t.text for t in tokens)


def parse(tokens: Sequence[SmilesToken]) -> RawMolecule:
    """Resolve branches and ring closures into an atom/bond list."""
    atoms: list[RawAtom] = []
    bonds: list[RawBond] = []
    pairs: set[frozenset] = set()
    stack: list[int] = []
    rings: dict[int, tuple[int, str | None]] = {}
    prev: int | None = None
    pending: str | None = None

    def add_bond(i, j, symbol):
        key = frozenset((i, j))
        if i == j:
            raise SmilesError(f"atom {i} bonded to itself")
        if key in pairs:
            raise SmilesError(f"duplicate bond between atoms {i} and {j}")
        pairs.add(key)
        bonds.append(RawBond(i, j, symbol))

    for tok in tokens:
        kind = tok.kind
        if kind in ("atom-organic", "atom-bracket"):
            atoms.append(RawAtom(tok.element, tok.aromatic, kind == "atom-bracket",
                                 tok.charge, tok.hcount))
            idx = len(atoms) - 1
            if prev is not None:
                add_bond(prev, idx, pending or "implicit")
            elif pending is not None:
                raise SmilesError(f"bond symbol with no preceding atom at {tok.start}")
            prev, pending = idx, None
        elif kind == "bond":
            if pending is not None or prev is None:
                raise SmilesError(f"misplaced bond symbol at position {tok.start}")
            pending = tok.bond
        elif kind == "branch-open":
            if prev is None or pending is not None:
                raise UnbalancedParentheses(f"branch opened without an atom at {tok.start}")
            stack.append(prev)
        elif kind == "branch-close":
            if not stack:
                raise UnbalancedParentheses(f"unmatched ')' at position {tok.start}")
            if pending is not None:
                raise SmilesError(f"dangling bond before ')' at {tok.start}")
            prev = stack.pop()
        else:
            if prev is None:
                raise SmilesError(f"ring closure with no atom at {tok.start}")
            if tok.ring in rings:
                other, sym = rings.pop(tok.ring)
                if sym is not None and pending is not None and sym != pending:
                    raise ConflictingRingBondOrder(
                        f"ring bond {tok.ring} written as both {sym} and {pending}")
                add_bond(other, prev, pending or sym or "implicit")
            else:
                rings[tok.ring] = (prev, pending)
            pending = None
    if pending is not None:
        raise SmilesError("SMILES ends with a bond symbol")
    if stack:
        raise UnbalancedParentheses(f"{len(stack)} unclosed branch(es)")
    if rings:
        raise UnclosedRingBond(f"unclosed ring bond(s) {sorted(rings)}")
    if not atoms:
        raise SmilesError("no atoms")
    return RawMolecule(tuple(atoms), tuple(bonds))


def _bridges(n: int, edges: Sequence[tuple[int, int]]) -> set[int]:
    """Indices of edges whose removal disconnects the graph."""
    adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for k, (i, j) in enumerate(edges):
        adj[i].append((j, k))
        adj[j].append((i, k))
    disc = [-1] * n
    low = [0] * n
    out: set[int] = set()
    t = 0
    for root in range(n):
        if disc[root] >= 0:
            continue
        disc[root] = low[root] = t
        t += 1
        stack = [(root, -1, iter(adj[root]))]
        while stack:
            v, via, it = stack[-1]
            for w, k in it:
                if k == via:
                    continue
                if disc[w] < 0:
                    disc[w] = low[w] = t
                    t += 1
                    stack.append((w, k, iter(adj[w])))
                    break
                low[v] = min(low[v], disc[w])
            else:
                stack.pop()
                if stack:
                    u = stack[-1][0]
                    low[u] = min(low[u], low[v])
                    if low[v] > disc[u]:
                        out.add(via)
    return out


def _implicit_h(element: str, aromatic: bool, orders: list[float], n_arom: int) -> int:
    """Hydrogens needed to reach the smallest admissible valence."""
    used = sum(o for o in orders if o != 1.5) + n_arom
    allowed = VALENCES[element]
    # aromatic C/N/P contribute one extra pi bond; O and S donate a lone pair
    if aromatic and element in ("C", "N", "P") and used + 1 <= max(allowed):
        used += 1
    for v in allowed:
        if used <= v:
            return int(v - used)
    raise ValenceExceeded(f"{element} with bond-order sum {used} exceeds {max(allowed)}")


def perceive(raw: RawMolecule, radii: RadiiTable | None = None,
             source_id: str = "") -> MolecularGraph:
    """Assign hydrogen counts, ring membership, hybridization and conjugation."""
    radii = radii or RadiiTable()
    atoms = raw.atoms
    heavy = [k for k, a in enumerate(atoms) if a.element != "H"]
    if not heavy:
        raise SmilesError("molecule has no heavy atoms")
    index = {k: pos for pos, k in enumerate(heavy)}
    extra_h = [0] * len(heavy)
    hbonds = [0] * len(heavy)
    bonds: list[tuple[int, int, str]] = []
    for b in raw.bonds:
        hi, hj = atoms[b.i].element == "H", atoms[b.j].element == "H"
        if hi and hj:
            raise SmilesError("hydrogen-hydrogen bond")
        if hi or hj:
            h, other = (b.i, b.j) if hi else (b.j, b.i)
            if b.symbol not in ("implicit", "single"):
                raise ValenceExceeded("hydrogen with a multiple bond")
            extra_h[index[other]] += 1
            hbonds[index[other]] += 1
            continue
        ai, aj = atoms[b.i], atoms[b.j]
        sym = b.symbol
        if sym == "implicit":
            sym = "aromatic" if ai.aromatic and aj.aromatic else "single"
        bonds.append((index[b.i], index[b.j], sym))
    for k, a in enumerate(atoms):
        if a.element == "H" and sum(1 for b in raw.bonds if k in (b.i, b.j)) != 1:
            raise SmilesError("explicit hydrogen must have exactly one bond")

    n = len(heavy)
    bridge = _bridges(n, [(i, j) for i, j, _ in bonds])
    # an aromatic symbol on a bridge (e.g. biphenyl written without '-') is a single bond
    bonds = [(i, j, "single" if k in bridge and s == "aromatic" else s)
             for k, (i, j, s) in enumerate(bonds)]
    ring = [k not in bridge for k in range(len(bonds))]
    orders = [ORDER_VALUE[s] for _, _, s in bonds]

    incident: list[list[int]] = [[] for _ in range(n)]
    for k, (i, j, _) in enumerate(bonds):
        incident[i].append(k)
        incident[j].append(k)

    def is_multiple(k):
        return orders[k] > 1.0

    conj = []
    for k, (i, j, _) in enumerate(bonds):
        others_i = any(is_multiple(m) for m in incident[i] if m != k)
        others_j = any(is_multiple(m) for m in incident[j] if m != k)
        if orders[k] == 1.5:
            conj.append(True)
        elif is_multiple(k):
            conj.append(others_i or others_j)
        else:
            conj.append(others_i and others_j)
    # a multiple bond next to a conjugated single bond joins that system (butadiene)
    for k in range(len(bonds)):
        if is_multiple(k) and not conj[k]:
            i, j, _ = bonds[k]
            conj[k] = any(conj[m] and not is_multiple(m)
                          for m in incident[i] + incident[j] if m != k)

    verts = []
    for pos, k in enumerate(heavy):
        a = atoms[k]
        inc = [orders[m] for m in incident[pos]]
        if a.bracket:
            h = (a.hcount or 0) + extra_h[pos]
        else:
            n_arom = sum(1 for o in inc if o == 1.5)
            h = _implicit_h(a.element, a.aromatic, inc + [1.0] * hbonds[pos], n_arom) \
                + extra_h[pos]
        n_double = sum(1 for o in inc if o == 2.0)
        if 3.0 in inc or n_double >= 2:
            hyb = "sp"
        elif a.aromatic or 1.5 in inc or n_double == 1:
            hyb = "sp2"
        else:
            hyb = "sp3"
        verts.append(VertexLabel(
            element=a.element, charge=a.charge, hybridization=hyb,
            aromatic=a.aromatic, conjugated=any(conj[m] for m in incident[pos]),
            hcount=h,
        ))

    edges = []
    for k, (i, j, _) in enumerate(bonds):
        label = EdgeLabel(
            order=orders[k], aromatic=orders[k] == 1.5, conjugated=conj[k], ring=ring[k],
            length=edge_length(orders[k], verts[i].element, verts[j].element, radii),
        )
        edges.append((min(i, j), max(i, j), label))
    edges.sort(key=lambda t: (t[0], t[1]))
    return MolecularGraph(tuple(verts), tuple(edges), source_id)


def from_smiles(smiles: str, radii: RadiiTable | None = None,
                source_id: str = "") -> MolecularGraph:
    return perceive(parse(tokenize(smiles)), radii, source_id or smiles)
