import json
import math

from collections import deque

import numpy as np
import networkx as nx

from plslope import logger, Truncation
from plslope.core_map import RationalInterval, image_interval, preimage_point, to_rational
from plslope.config import DEFAULTS
from plslope.templates import render_template, DIAGRAM_DOT

_HOFBAUER = DEFAULTS["hofbauer"]

class ForbiddenWordError(ValueError):
    def __init__(self, word):
        super().__init__("forbidden word {}".format(list(word)))
        self.word = tuple(word)

class CertificateError(Exception):
    pass


class Letter():
    __slots__ = ("index", "interval", "direction")

    def __init__(self, index, interval, direction):
        self.index = index
        self.interval = interval
        self.direction = direction

    def __repr__(self):
        return "Letter({}, {}, {:+d})".format(self.index, self.interval, self.direction)

def alphabet(f):
    return [Letter(i, RationalInterval.open(a, b), d) for i, (a, b, d) in enumerate(f.laps())]


class ConstraintWord():
    """A vertex of the diagram.

    ``suffixes`` holds the follower sets of every suffix of the word, longest
    first, so the follower sets of an extension cost one image per suffix.
    """

    __slots__ = ("letters", "follower", "suffixes")

    def __init__(self, letters, suffixes):
        self.letters = tuple(letters)
        self.suffixes = tuple(suffixes)
        self.follower = self.suffixes[0]

    @property
    def key(self):
        return self.letters

    def __len__(self):
        return len(self.letters)

    def label(self):
        return "".join(str(i) if i < 10 else "[{}]".format(i) for i in self.letters)

    def __repr__(self):
        return "ConstraintWord({}, {})".format(self.label(), self.follower)


def _check_word(letters, word):
    if not word:
        return
    for i in word:
        if not (0 <= i < len(letters)):
            raise ValueError("invalid letter index {}".format(i))

def _suffix_followers(f, letters, word):
    followers = []
    for i in word:
        followers = [image_interval(f, s).intersect(letters[i].interval) for s in followers]
        followers.append(letters[i].interval)
    return followers

def _extend(f, letters, suffixes, letter):
    target = letters[letter].interval
    return [image_interval(f, s).intersect(target) for s in suffixes] + [target]

def _minimal(word, followers):
    full = followers[0]
    if full.is_empty():
        raise ForbiddenWordError(word)
    k = 0
    while k + 1 < len(followers) and followers[k + 1] == full:
        k += 1
    return ConstraintWord(word[k:], followers[k:])

def follower_set(f, word):
    """fol(word): points that have just finished the itinerary; the empty word gives [0,1]."""
    if not word:
        return RationalInterval.unit()
    letters = alphabet(f)
    _check_word(letters, word)
    return _suffix_followers(f, letters, list(word))[0]

def min_word(f, word):
    """The shortest suffix with the same follower set as word."""
    letters = alphabet(f)
    word = tuple(word)
    if not word:
        raise ValueError("min_word needs a nonempty word")
    _check_word(letters, word)
    return _minimal(word, _suffix_followers(f, letters, word))


class Diagram():
    def __init__(self, f, letters):
        self.f = f
        self.letters = letters
        self.vertices = {}
        self.arrows = {}
        self.truncation = Truncation.EXACT
        self.root_letters = []

    @property
    def exact(self):
        return self.truncation == Truncation.EXACT

    def vertex_count(self):
        return len(self.vertices)

    def arrow_count(self):
        return sum(len(v) for v in self.arrows.values())

    def successors(self, key):
        return [target for _, target in self.arrows.get(key, [])]

    def vertex(self, key):
        return self.vertices[tuple(key)]

    def to_networkx(self):
        graph = nx.DiGraph()
        graph.add_nodes_from(self.vertices)
        for key, out in self.arrows.items():
            for letter, target in out:
                graph.add_edge(key, target, letter=letter)
        return graph

    def order(self):
        return sorted(self.vertices, key=lambda k: (len(k), k))


def build_diagram(f, word_cap=None, vertex_cap=None):
    """Breadth-first construction of the arrows alpha -> min(alpha A) from the single-letter vertices."""
    word_cap = _HOFBAUER["word_cap"] if word_cap is None else word_cap
    vertex_cap = _HOFBAUER["vertex_cap"] if vertex_cap is None else vertex_cap
    if word_cap < 1 or vertex_cap < 1:
        raise ValueError("caps must be >= 1")
    letters = alphabet(f)
    d = Diagram(f, letters)
    queue = deque()
    for letter in letters:
        root = ConstraintWord((letter.index,), (letter.interval,))
        if len(d.vertices) >= vertex_cap:
            d.truncation = Truncation.VERTEX_CAP
            break
        d.vertices[root.key] = root
        d.root_letters.append(root.key)
        queue.append(root)
    while queue:
        alpha = queue.popleft()
        out = []
        for letter in letters:
            followers = _extend(f, letters, alpha.suffixes, letter.index)
            if followers[0].is_empty():
                continue
            beta = _minimal(alpha.letters + (letter.index,), followers)
            if beta.key not in d.vertices:
                if len(beta) > word_cap:
                    d.truncation = Truncation.WORD_CAP if d.truncation == Truncation.EXACT else d.truncation
                    continue
                if len(d.vertices) >= vertex_cap:
                    d.truncation = Truncation.VERTEX_CAP
                    continue
                d.vertices[beta.key] = beta
                queue.append(beta)
            out.append((letter.index, beta.key))
        d.arrows[alpha.key] = out
    if d.exact:
        logger().info("build_diagram: exact diagram with %d vertices, %d arrows", d.vertex_count(), d.arrow_count())
    else:
        logger().warning("build_diagram: truncated (%s) at %d vertices", d.truncation.name, d.vertex_count())
    return d

def scc_decomposition(d):
    """Strongly connected components carrying loops, largest first."""
    graph = d.to_networkx()
    components = []
    for component in nx.strongly_connected_components(graph):
        if len(component) == 1:
            (key,) = component
            if not graph.has_edge(key, key):
                continue
        components.append(sorted(component, key=lambda k: (len(k), k)))
    components.sort(key=lambda c: (-len(c), len(c[0]), c[0]))
    return components

def scc_entropy(d, component):
    index = {key: i for i, key in enumerate(component)}
    matrix = np.zeros((len(component), len(component)))
    for key in component:
        for target in d.successors(key):
            if target in index:
                matrix[index[key], index[target]] += 1
    radius = float(np.max(np.abs(np.linalg.eigvals(matrix)))) if len(component) else 0.0
    return math.log(radius) if radius > 1 else 0.0

def top_scc(d):
    components = scc_decomposition(d)
    if not components:
        return None, 0.0
    return max(((c, scc_entropy(d, c)) for c in components), key=lambda item: item[1])

def loop_count(d, vertex, n_max):
    """l_1..l_n_max: closed paths of each length through vertex, as exact integers."""
    vertex = tuple(vertex)
    if vertex not in d.vertices:
        raise KeyError("vertex {} not in diagram".format(vertex))
    paths = {vertex: 1}
    counts = []
    for _ in range(n_max):
        nxt = {}
        for key, c in paths.items():
            for target in d.successors(key):
                nxt[target] = nxt.get(target, 0) + c
        paths = nxt
        counts.append(paths.get(vertex, 0))
    return counts


class RecurrenceReport():
    __slots__ = ("ratios", "trailing_min", "bounded")

    def __init__(self, ratios, trailing_min, bounded):
        self.ratios = ratios
        self.trailing_min = trailing_min
        self.bounded = bounded


def positive_recurrence_ratio(d, vertex, lam, n_max, threshold=None):
    threshold = _HOFBAUER["recurrence_threshold"] if threshold is None else threshold
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if lam <= 1:
        raise ValueError("lambda must exceed 1")
    counts = loop_count(d, vertex, n_max)
    log_lam = math.log(lam)
    ratios = [math.exp(math.log(c) - n * log_lam) if c else 0.0 for n, c in enumerate(counts, start=1)]
    trailing = ratios[len(ratios) // 2:] or ratios
    trailing_min = min(trailing)
    bounded = trailing_min > threshold
    if not d.exact:
        logger().info("positive_recurrence_ratio: diagram is truncated (%s)", d.truncation.name)
    return RecurrenceReport(ratios, trailing_min, bounded)


class LoopCertificate():
    __slots__ = ("loop", "interval", "chain")

    def __init__(self, loop, interval, chain):
        self.loop = tuple(loop)
        self.interval = interval
        self.chain = tuple(chain)

    def __len__(self):
        return len(self.loop) - 1


def _lap_of(d, key):
    return key[-1]

def loop_certificate(f, d, loop):
    """The subinterval of fol(alpha_0) that f^n maps monotonically onto it along the loop."""
    loop = [tuple(k) for k in loop]
    if len(loop) < 2 or loop[0] != loop[-1]:
        loop = loop + [loop[0]]
    for a, b in zip(loop, loop[1:]):
        if b not in d.successors(a):
            raise ValueError("{} -> {} is not an arrow".format(a, b))
    chain = [d.vertex(loop[-1]).follower]
    for key in reversed(loop[:-1]):
        lap = _lap_of(d, key)
        part = f.branch_preimage(lap, chain[0]).intersect(d.vertex(key).follower)
        chain.insert(0, part)
    for key, piece, nxt in zip(loop, chain, chain[1:]):
        if piece.is_empty() or not d.vertex(key).follower.contains_interval(piece):
            raise CertificateError("chain left the follower set of {}".format(key))
        if any(piece.lo < c < piece.hi for c in f.critical.interior):
            raise CertificateError("chain piece {} is not monotone".format(piece))
        if image_interval(f, piece) != nxt:
            raise CertificateError("f({}) = {} differs from {}".format(piece, image_interval(f, piece), nxt))
    return LoopCertificate(loop, chain[0], chain)

def enumerate_loops(d, vertex, n, limit=None):
    """Closed paths of length n at vertex as vertex lists (first == last)."""
    vertex = tuple(vertex)
    found = []
    stack = [(vertex, [vertex])]
    while stack:
        key, path = stack.pop()
        if len(path) == n + 1:
            if key == vertex:
                found.append(path)
                if limit is not None and len(found) >= limit:
                    break
            continue
        for target in reversed(d.successors(key)):
            stack.append((target, path + [target]))
    return found

def seed_depth(f, d, vertex, x, n_cap):
    """The first n0 with f^-n0(x) meeting fol(vertex), or None within n_cap."""
    follower = d.vertex(vertex).follower
    level = {to_rational(x)}
    for n0 in range(n_cap + 1):
        if any(follower.contains(p) for p in level):
            return n0
        level = {q for p in level for q in preimage_point(f, p)}
        if not level:
            return None
    return None

def export_json(d):
    order = d.order()
    index = {key: i for i, key in enumerate(order)}
    data = {
        "truncation": d.truncation.name,
        "letters": [{"index": l.index, "interval": str(l.interval), "direction": l.direction} for l in d.letters],
        "vertices": [{"id": index[k], "word": list(k), "follower": str(d.vertices[k].follower)} for k in order],
        "arrows": [{"from": index[k], "letter": letter, "to": index[t]} for k in order for letter, t in d.arrows.get(k, [])],
    }
    return json.dumps(data, indent=2, sort_keys=True)

def export_dot(d, metadata=()):
    order = d.order()
    index = {key: i for i, key in enumerate(order)}
    vertices = [{"id": index[k], "label": "{} {}".format(d.vertices[k].label(), d.vertices[k].follower)} for k in order]
    arrows = [{"src": index[k], "dst": index[t], "letter": letter} for k in order for letter, t in d.arrows.get(k, [])]
    return render_template(DIAGRAM_DOT, truncation=d.truncation.name, metadata=list(metadata),
            vertices=vertices, arrows=arrows)
