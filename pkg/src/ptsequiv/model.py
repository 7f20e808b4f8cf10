"""Reactive probabilistic transition systems.

A process graph has two kinds of states: action states, where the
environment picks one of a deterministic menu of actions, and probabilistic
states, which resolve to action states by an exact distribution.  Graphs
here are finite, acyclic, rooted and immutable; `after` derives the process
that remains once a menu has been observed and an action performed.
"""

from __future__ import annotations

from fractions import Fraction

from .rational import OMEGA, as_fraction

ACTION = "act"
PROB = "prob"

Menu = frozenset


class InvalidProcessError(ValueError):
    """A process graph violates a structural invariant."""

    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class AfterUndefinedError(ValueError):
    """`after` was asked for a (menu, action) pair of probability zero."""


class ProcessGraph:
    """A rooted PTS fragment.  Treat instances as immutable.

    action_edges is an iterable of (state, action, target) triples and
    prob_edges of (state, probability, target) triples with exact rational
    probabilities; ints are accepted, floats are rejected.
    """

    def __init__(self, alphabet, root, states, action_edges=(), prob_edges=()):
        self.alphabet = tuple(alphabet)
        self.root = root
        self.states = dict(states)
        self.action_edges = tuple((s, a, t) for s, a, t in action_edges)
        self.prob_edges = tuple(
            (s, as_fraction(p), t) for s, p, t in prob_edges
        )
        self._succ = {(s, a): t for s, a, t in self.action_edges}
        self._dist = {}
        for s, p, t in self.prob_edges:
            self._dist.setdefault(s, []).append((p, t))
        self._menus = {}
        for s, a, _ in self.action_edges:
            self._menus.setdefault(s, set()).add(a)
        self._after_cache = {}

    # -- basic queries ------------------------------------------------

    def is_action(self, state) -> bool:
        return self.states.get(state) == ACTION

    def is_prob(self, state) -> bool:
        return self.states.get(state) == PROB

    def menu(self, state) -> Menu:
        """The set of actions an action state can initially perform."""
        if not self.is_action(state):
            raise ValueError("menu() of non-action state %r" % state)
        return frozenset(self._menus.get(state, ()))

    def successor(self, state, action):
        return self._succ[(state, action)]

    def distribution(self, state):
        return tuple(self._dist.get(state, ()))

    # -- validation ---------------------------------------------------

    def validate(self):
        """Return the list of invariant violations (empty when valid)."""
        v = []
        if not self.alphabet:
            v.append("alphabet is empty")
        if len(set(self.alphabet)) != len(self.alphabet):
            v.append("alphabet contains duplicates")
        if OMEGA in self.alphabet:
            v.append("alphabet contains the reserved symbol %r" % OMEGA)
        if self.root not in self.states:
            v.append("root %r is not a declared state" % self.root)
        for s, kind in self.states.items():
            if kind not in (ACTION, PROB):
                v.append("state %r has unknown kind %r" % (s, kind))

        seen = {}
        for s, a, t in self.action_edges:
            if s not in self.states:
                v.append("action edge from undeclared state %r" % s)
                continue
            if t not in self.states:
                v.append("action edge from %r to undeclared state %r" % (s, t))
            if not self.is_action(s):
                v.append("action edge out of probabilistic state %r" % s)
            if a not in self.alphabet:
                v.append("action %r at state %r is not in the alphabet" % (a, s))
            if (s, a) in seen:
                if seen[(s, a)] != t:
                    v.append("action nondeterminism at state %r on %r" % (s, a))
                else:
                    v.append("duplicate action edge at state %r on %r" % (s, a))
            seen[(s, a)] = t

        targets = {}
        for s, p, t in self.prob_edges:
            if s not in self.states:
                v.append("probabilistic edge from undeclared state %r" % s)
                continue
            if t not in self.states:
                v.append("probabilistic edge from %r to undeclared state %r" % (s, t))
                continue
            if not self.is_prob(s):
                v.append("probabilistic edge out of action state %r" % s)
            if not 0 < p <= 1:
                v.append("probability %s at state %r is outside (0, 1]" % (p, s))
            if not self.is_action(t):
                v.append("probabilistic edge from %r leads to non-action state %r" % (s, t))
            if (s, t) in targets:
                v.append("duplicate probabilistic edge %r -> %r" % (s, t))
            targets[(s, t)] = p
        for s, kind in self.states.items():
            if kind != PROB:
                continue
            dist = self._dist.get(s, ())
            if not dist:
                v.append("probabilistic state %r has no outgoing transitions" % s)
            else:
                total = sum(p for p, _ in dist)
                if total != 1:
                    v.append("probabilities at state %r sum to %s" % (s, total))

        v.extend(self._check_acyclic())
        reachable = self._reachable(self.root)
        unreachable = sorted(set(self.states) - reachable)
        for s in unreachable:
            v.append("state %r is unreachable from the root" % s)
        return v

    def check(self) -> "ProcessGraph":
        violations = self.validate()
        if violations:
            raise InvalidProcessError(violations)
        return self

    def _edges_out(self, state):
        for a in sorted(self._menus.get(state, ())):
            yield self._succ[(state, a)]
        for _, t in self._dist.get(state, ()):
            yield t

    def _check_acyclic(self):
        color = {}

        def visit(s, stack):
            color[s] = 1
            for t in self._edges_out(s):
                if t not in self.states:
                    continue
                if color.get(t) == 1:
                    return ["cycle through state %r" % t]
                if t not in color:
                    bad = visit(t, stack)
                    if bad:
                        return bad
            color[s] = 2
            return []

        for s in sorted(self.states):
            if s not in color:
                bad = visit(s, [])
                if bad:
                    return bad
        return []

    def _reachable(self, start):
        if start not in self.states:
            return set()
        seen = {start}
        todo = [start]
        while todo:
            s = todo.pop()
            for t in self._edges_out(s):
                if t in self.states and t not in seen:
                    seen.add(t)
                    todo.append(t)
        return seen

    # -- derived views ------------------------------------------------

    def menu_distribution(self) -> dict:
        """Map each initially observable menu to its exact probability."""
        if self.is_action(self.root):
            return {self.menu(self.root): Fraction(1)}
        out = {}
        for p, t in self.distribution(self.root):
            m = self.menu(t)
            out[m] = out.get(m, Fraction(0)) + p
        return out

    def action_depth(self) -> int:
        """Maximum number of action transitions on any path from the root."""
        memo = {}

        def depth(s):
            if s in memo:
                return memo[s]
            if self.is_prob(s):
                d = max((depth(t) for _, t in self.distribution(s)), default=0)
            else:
                d = max(
                    (1 + depth(self._succ[(s, a)]) for a in self._menus.get(s, ())),
                    default=0,
                )
            memo[s] = d
            return d

        return depth(self.root)

    def restricted_to_reachable(self, root) -> "ProcessGraph":
        keep = self._reachable(root)
        return ProcessGraph(
            self.alphabet,
            root,
            {s: k for s, k in self.states.items() if s in keep},
            [(s, a, t) for s, a, t in self.action_edges if s in keep],
            [(s, p, t) for s, p, t in self.prob_edges if s in keep],
        )

    def after(self, menu: Menu, action) -> "ProcessGraph":
        """The process left after observing `menu` and performing `action`.

        For an action-state root this re-roots at the action's successor.
        For a probabilistic root it renormalizes over the branches whose
        target offers exactly `menu`, flattening one subsequent level of
        probabilistic states (the model guarantees there is at most one).
        """
        menu = frozenset(menu)
        cached = self._after_cache.get((menu, action))
        if cached is not None:
            return cached
        if action not in menu:
            raise AfterUndefinedError("action %r is not in menu %s" % (action, sorted(menu)))
        if self.is_action(self.root):
            if self.menu(self.root) != menu:
                raise AfterUndefinedError(
                    "root offers %s, not %s" % (sorted(self.menu(self.root)), sorted(menu))
                )
            derived = self.restricted_to_reachable(self._succ[(self.root, action)])
            self._after_cache[(menu, action)] = derived
            return derived

        branches = [
            (p, t) for p, t in self.distribution(self.root) if self.menu(t) == menu
        ]
        if not branches:
            raise AfterUndefinedError(
                "no branch of the root has menu %s" % (sorted(menu),)
            )
        total = sum(p for p, _ in branches)
        edges = {}
        for p, t in branches:
            nxt = self._succ[(t, action)]
            if self.is_prob(nxt):
                for q, u in self.distribution(nxt):
                    # one-level flattening; u is an action state by the model
                    edges[u] = edges.get(u, Fraction(0)) + p * q / total
            else:
                edges[nxt] = edges.get(nxt, Fraction(0)) + p / total

        new_root = "after"
        n = 0
        while new_root in self.states:
            new_root = "after%d" % n
            n += 1
        grown = ProcessGraph(
            self.alphabet,
            new_root,
            dict(self.states, **{new_root: PROB}),
            self.action_edges,
            tuple(self.prob_edges)
            + tuple((new_root, p, t) for t, p in sorted(edges.items())),
        )
        derived = grown.restricted_to_reachable(new_root)
        self._after_cache[(menu, action)] = derived
        return derived

    # -- value semantics ----------------------------------------------

    def __eq__(self, other):
        if not isinstance(other, ProcessGraph):
            return NotImplemented
        return (
            self.alphabet == other.alphabet
            and self.root == other.root
            and self.states == other.states
            and set(self.action_edges) == set(other.action_edges)
            and {(s, t): p for s, p, t in self.prob_edges}
            == {(s, t): p for s, p, t in other.prob_edges}
        )

    def __repr__(self):
        return "ProcessGraph(root=%r, states=%d)" % (self.root, len(self.states))
