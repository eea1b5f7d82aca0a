"""Integral 1-chains as weighted cyclic words.

Two flavours share the grammar machinery:

* OneChain:  chains over a free group basis.  Letters are (generator, +1/-1);
  words are cyclically reduced and nonempty, terms pairwise distinct as
  cyclic words.
* EdgeChain: chains of loops on a complex 1-skeleton.  Letters are signed
  edge ids; each loop must close up in the complex.

Word grammar (free group side): lowercase letter = generator, uppercase =
its inverse, ``[x,y]`` expands to the commutator, ``k*word`` scales a term,
terms are separated by ``+`` / ``-``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .complexes import ComplexError, TwoComplex


class ChainError(ValueError):
    pass


def letter_inverse(letter):
    sym, sign = letter
    return (sym, -sign)


def word_inverse(word):
    return tuple(letter_inverse(l) for l in reversed(word))


def free_reduce(word):
    out = []
    for letter in word:
        if out and out[-1] == letter_inverse(letter):
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def cyclic_reduce(word):
    w = list(free_reduce(word))
    while len(w) >= 2 and w[0] == letter_inverse(w[-1]):
        w = w[1:-1]
        w = list(free_reduce(w))
    return tuple(w)


def cyclic_rotations(word):
    return [word[k:] + word[:k] for k in range(len(word))] or [word]


def canonical_rotation(word):
    """Lexicographically least rotation; canonical key for cyclic equality."""
    return min(cyclic_rotations(word)) if word else word


def cyclically_equal(w1, w2):
    return len(w1) == len(w2) and canonical_rotation(w1) == canonical_rotation(w2)


@dataclass(frozen=True)
class OneChain:
    """Integral 1-chain over a free group: sum of coeff * cyclic word."""

    basis: tuple  # generator names, ordered
    terms: tuple  # ((coeff, word), ...) with word a tuple of (gen, sign)

    @classmethod
    def make(cls, basis, terms):
        basis = tuple(basis)
        bset = set(basis)
        if len(bset) != len(basis):
            raise ChainError("duplicate generator in basis")
        merged = []
        for coeff, word in terms:
            word = cyclic_reduce(tuple(word))
            if not word:
                raise ChainError("chain term reduces to the empty word")
            for sym, sign in word:
                if sym not in bset:
                    raise ChainError(f"letter {sym!r} outside the basis")
                if sign not in (1, -1):
                    raise ChainError("letter sign must be +1 or -1")
            for entry in merged:
                if cyclically_equal(entry[1], word):
                    entry[0] += coeff
                    break
            else:
                merged.append([coeff, word])
        return cls(basis, tuple((c, w) for c, w in merged if c))

    def is_zero(self):
        return not self.terms

    def exponent_vector(self):
        """Per-generator signed letter count, weighted by coefficients.

        Zero iff the chain is a 1-boundary of the free group.
        """
        out = {g: 0 for g in self.basis}
        for coeff, word in self.terms:
            for sym, sign in word:
                out[sym] += coeff * sign
        return out

    def is_boundary(self):
        return all(v == 0 for v in self.exponent_vector().values())

    def in_basis(self, bigger):
        """The same chain viewed over a larger basis."""
        bigger = tuple(bigger)
        if not set(self.basis) <= set(bigger):
            raise ChainError("target basis does not contain the chain's basis")
        return OneChain.make(bigger, self.terms)

    def scaled(self, k):
        return OneChain.make(self.basis, [(k * c, w) for c, w in self.terms])

    def text(self):
        if not self.terms:
            return "0"
        parts = []
        for coeff, word in self.terms:
            body = "".join(s if sign == 1 else s.upper() for s, sign in word)
            if coeff == 1:
                parts.append(body)
            elif coeff == -1:
                parts.append(f"-{body}")
            else:
                parts.append(f"{coeff}*{body}")
        out = parts[0]
        for p in parts[1:]:
            out += f" - {p[1:]}" if p.startswith("-") else f" + {p}"
        return out


def homology_class(chain: OneChain):
    return chain.exponent_vector()


def _parse_word(text, basis_set, where):
    """Word tokens: letters and [w1,w2] commutator sugar, recursively."""
    word = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "[":
            depth = 1
            j = i + 1
            comma = None
            while j < len(text):
                if text[j] == "[":
                    depth += 1
                elif text[j] == "]":
                    depth -= 1
                    if depth == 0:
                        break
                elif text[j] == "," and depth == 1:
                    comma = j
                j += 1
            if j >= len(text) or comma is None:
                raise ChainError(f"{where}: malformed commutator")
            left = _parse_word(text[i + 1 : comma], basis_set, where)
            right = _parse_word(text[comma + 1 : j], basis_set, where)
            word += list(left) + list(right) + list(word_inverse(left)) + list(word_inverse(right))
            i = j + 1
        elif ch.isalpha():
            sym = ch.lower()
            if sym not in basis_set:
                raise ChainError(f"{where}: unknown letter {ch!r}")
            word.append((sym, 1 if ch.islower() else -1))
            i += 1
        elif ch.isspace():
            i += 1
        else:
            raise ChainError(f"{where}: unexpected character {ch!r}")
    return tuple(word)


def parse_chain(text, basis) -> OneChain:
    """Parse the chain grammar over single-letter generators."""
    basis = tuple(basis)
    bset = set(basis)
    for g in basis:
        if len(g) != 1 or not g.isalpha() or not g.islower():
            raise ChainError("word grammar wants single lowercase letters as generators")
    # split into signed terms at top level
    terms = []
    current = []
    sign = 1
    depth = 0
    for ch in text:
        if ch == "[":
            depth += 1
            current.append(ch)
        elif ch == "]":
            depth -= 1
            current.append(ch)
        elif ch in "+-" and depth == 0:
            if current and any(not c.isspace() for c in current):
                terms.append((sign, "".join(current)))
            current = []
            sign = 1 if ch == "+" else -1
        else:
            current.append(ch)
    if current and any(not c.isspace() for c in current):
        terms.append((sign, "".join(current)))
    if not terms:
        raise ChainError("empty chain text")
    parsed = []
    for sign, chunk in terms:
        chunk = chunk.strip()
        coeff = sign
        if "*" in chunk:
            head, chunk = chunk.split("*", 1)
            coeff = sign * int(head.strip())
        word = _parse_word(chunk.strip(), bset, f"term {chunk!r}")
        reduced = cyclic_reduce(word)
        if not reduced:
            raise ChainError(f"term {chunk!r} reduces to the empty word")
        parsed.append((coeff, reduced))
    return OneChain.make(basis, parsed)


@dataclass(frozen=True)
class EdgeChain:
    """Integral chain of loops on the 1-skeleton of a complex."""

    terms: tuple  # ((coeff, loop), ...) with loop a tuple of signed edges

    @classmethod
    def make(cls, cx: TwoComplex, terms):
        out = []
        for coeff, loop in terms:
            loop = tuple(tuple(se) for se in loop)
            if not loop:
                raise ChainError("edge loop must be nonempty")
            if coeff == 0:
                continue
            for e, sign in loop:
                if e not in cx.edges:
                    raise ChainError(f"unknown edge id {e}")
            for k in range(len(loop)):
                if cx.endpoint(loop[k], 1) != cx.endpoint(loop[(k + 1) % len(loop)], 0):
                    raise ChainError("edge loop does not close up")
            out.append((coeff, loop))
        return cls(tuple(out))

    def circle_words(self):
        """Edge word of each circle: the loop traversed coeff times."""
        words = []
        for coeff, loop in self.terms:
            if coeff > 0:
                words.append(tuple(loop) * coeff)
            else:
                words.append(word_inverse(tuple(loop)) * (-coeff))
        return words

    def one_chain_vector(self, cx: TwoComplex):
        """Image in C1 of the complex: edge id -> signed count."""
        out = {}
        for coeff, loop in self.terms:
            for e, sign in loop:
                out[e] = out.get(e, 0) + coeff * sign
        return {e: c for e, c in out.items() if c}

    def text(self, cx: TwoComplex):
        if not self.terms:
            return "0"
        parts = []
        for coeff, loop in self.terms:
            body = " ".join(
                f"{cx.name('e', e)}{'+' if sign == 1 else '-'}" for e, sign in loop
            )
            parts.append(body if coeff == 1 else f"{coeff}*{body}")
        return " + ".join(parts)


def parse_edge_chain(text, cx: TwoComplex) -> EdgeChain:
    """Grammar: terms 'k * e1+ e2- ...' joined by '+'."""
    terms = []
    pieces = [p.strip() for p in text.split(" + ")] if " + " in text else [text.strip()]
    for piece in pieces:
        if not piece or piece == "0":
            continue
        coeff = 1
        if "*" in piece:
            head, piece = piece.split("*", 1)
            coeff = int(head.strip())
        loop = []
        for tok in piece.split():
            if tok.endswith("+"):
                loop.append((cx.edge_id(tok[:-1]), 1))
            elif tok.endswith("-"):
                loop.append((cx.edge_id(tok[:-1]), -1))
            else:
                raise ChainError(f"edge token {tok!r} needs +/- suffix")
        terms.append((coeff, tuple(loop)))
    return EdgeChain.make(cx, terms)
