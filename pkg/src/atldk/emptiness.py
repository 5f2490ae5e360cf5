"""Emptiness checks for the goal automata, a generic occurrence-acceptance
oracle, and witness strategy extraction from winning regions."""

from __future__ import annotations

from collections import deque

from .arena import Strategy
from .strategy_automata import BOT, UNTIL, WEAK_UNTIL


class EmptinessError(Exception):
    pass


REACHABILITY = "reachability-attractor"
SAFETY = "safety-fixpoint"
GENERIC = "generic-occurrence"

DEFAULT_ORACLE_GUARD = 20


class GameSolution:
    """Solution of the choice game on an automaton: the winning region, a chosen
    coalition action per winning state, and the solver that produced it.

    For the reachability solver the choice is defined on winning states that
    still carry obligations; for the safety solver on every winning state.
    """

    def __init__(self, kind, winning, choice, targets=frozenset()):
        self.kind = kind
        self.winning = frozenset(winning)
        self.choice = dict(choice)
        self.targets = frozenset(targets)

    def wins(self, state):
        return state in self.winning


def check_until_nonempty(automaton):
    """Least-fixpoint attractor to the discharged states: the automaton accepts
    some tree iff the initial state can force every path into an obligation-free
    state without ever touching the failure state."""
    if automaton.kind != UNTIL:
        raise EmptinessError("expected an until automaton, got %s" % automaton.kind)
    targets = set(automaton.targets())
    attractor = set(targets)
    choice = {}
    changed = True
    while changed:
        changed = False
        for state in automaton.states:
            if state in attractor or state.is_bot:
                continue
            for c_a in automaton.alphabet:
                successors = automaton.delta[(state, c_a)]
                if BOT in successors:
                    continue
                if all(t in attractor for t in successors):
                    attractor.add(state)
                    choice[state] = c_a
                    changed = True
                    break
    solution = GameSolution(REACHABILITY, attractor, choice, targets)
    return automaton.init in attractor, solution


def check_weak_nonempty(automaton):
    """Greatest-fixpoint safety region avoiding the failure state: the automaton
    accepts some tree iff the initial state can keep every path away from it."""
    if automaton.kind != WEAK_UNTIL:
        raise EmptinessError("expected a weak-until automaton, got %s" % automaton.kind)
    safe = {s for s in automaton.states if not s.is_bot}
    changed = True
    while changed:
        changed = False
        for state in list(safe):
            keeps = any(
                BOT not in automaton.delta[(state, c_a)]
                and all(t in safe for t in automaton.delta[(state, c_a)])
                for c_a in automaton.alphabet)
            if not keeps:
                safe.discard(state)
                changed = True
    choice = {}
    for state in safe:
        for c_a in automaton.alphabet:
            successors = automaton.delta[(state, c_a)]
            if BOT not in successors and all(t in safe for t in successors):
                choice[state] = c_a
                break
    solution = GameSolution(SAFETY, safe, choice)
    return automaton.init in safe, solution


def until_accept(automaton):
    """Occurrence family for until: the path visits an obligation-free state and
    never the failure state."""
    def accept(visited):
        return BOT not in visited and any(automaton.is_target(s) for s in visited)
    return accept


def weak_accept(automaton):
    """Occurrence family for weak until: the path never visits the failure state."""
    def accept(visited):
        return BOT not in visited
    return accept


def generic_occurrence_emptiness(automaton, accept, guard=DEFAULT_ORACLE_GUARD):
    """Decide nonemptiness for an arbitrary occurrence condition by solving the
    game on the (state, visited-set) product.

    Along any play the visited set only grows, so it converges; a play is won
    when the limit set satisfies the acceptance predicate. Slices of constant
    visited set are solved by a greatest fixpoint when staying forever is
    acceptable and a least fixpoint when the play must leave, recursing into
    strictly larger visited sets. Desk-scale only.
    """
    if len(automaton.states) > guard:
        raise EmptinessError("size guard exceeded: %d automaton states > %d"
                             % (len(automaton.states), guard))
    memo = {}

    def solve(visited):
        if visited in memo:
            return memo[visited]
        staying_wins = bool(accept(visited))
        values = {s: staying_wins for s in visited}
        memo[visited] = values

        def successor_value(t):
            if t in visited:
                return values[t]
            return solve(visited | {t})[t]

        changed = True
        while changed:
            changed = False
            for s in visited:
                value = any(
                    all(successor_value(t) for t in automaton.delta[(s, c_a)])
                    for c_a in automaton.alphabet)
                if value != values[s]:
                    values[s] = value
                    changed = True
        return values

    start = frozenset([automaton.init])
    return solve(start)[automaton.init]


def extract_witness_strategy(solution, automaton, hat):
    """Turn a winning region into a finite observation-based strategy.

    Replays the automaton from its initial state along the chosen actions,
    recording one entry per observation history up to depth |states|; histories
    beyond the map, or past a discharged state, fall back to the default action.
    """
    if not solution.wins(automaton.init):
        raise EmptinessError("solution does not witness nonemptiness")
    g = hat.source
    members = g.coalition_tuple(hat.coalition)
    any_member = next(iter(automaton.source_kset))
    z0 = g.obs(hat.coalition, any_member)
    depth_cap = len(automaton.states)
    default = automaton.alphabet[0]
    mapping = {}
    queue = deque([(automaton.init, (z0,))])
    while queue:
        state, history = queue.popleft()
        if automaton.kind == UNTIL and automaton.is_target(state):
            continue
        if state not in solution.choice:
            continue
        c_a = solution.choice[state]
        mapping[history] = c_a
        if len(history) >= depth_cap:
            continue
        for z, target in automaton.classes[(state, c_a)]:
            queue.append((target, history + (z,)))
    return Strategy(members, mapping, default)
