"""Game arenas: states, labeled transitions, observations, runs, and strategies."""

from __future__ import annotations

import itertools
import json

from .formula import FRESH_MARK


class ArenaError(Exception):
    pass


class Arena:
    """A finite multi-agent game arena.

    Joint actions are tuples aligned with the agent order. The transition
    relation is total and serial: every (state, joint action) pair has at
    least one successor.
    """

    def __init__(self, agents, actions, states, labels, initial, observes, hidden, transitions):
        self.agents = tuple(agents)
        self.actions = {a: tuple(actions[a]) for a in self.agents}
        self.states = tuple(states)
        self.labels = {q: frozenset(labels[q]) for q in self.states}
        self.initial = tuple(initial)
        self.observes = {a: frozenset(observes[a]) for a in self.agents}
        self.hidden = frozenset(hidden)
        self.transitions = {key: frozenset(targets) for key, targets in transitions.items()}
        self._state_index = {q: i for i, q in enumerate(self.states)}
        self._validate()

    def _validate(self):
        if not self.states:
            raise ArenaError("arena has no states")
        if not self.initial:
            raise ArenaError("arena has no initial states")
        if len(set(self.agents)) != len(self.agents):
            raise ArenaError("duplicate agent names")
        if len(self._state_index) != len(self.states):
            raise ArenaError("duplicate state ids")
        for a in self.agents:
            if not self.actions[a]:
                raise ArenaError("agent %s has no actions" % a)
            if len(set(self.actions[a])) != len(self.actions[a]):
                raise ArenaError("duplicate action names for agent %s" % a)
        for q in self.initial:
            if q not in self._state_index:
                raise ArenaError("unknown initial state %s" % q)
        allowed = self.props
        for q, label in self.labels.items():
            extra = label - allowed
            if extra:
                raise ArenaError("state %s labeled with undeclared props %s" % (q, sorted(extra)))
        for (q, c), targets in self.transitions.items():
            if q not in self._state_index:
                raise ArenaError("transition from unknown state %s" % q)
            if len(c) != len(self.agents):
                raise ArenaError("joint action %r has wrong arity" % (c,))
            for a, act in zip(self.agents, c):
                if act not in self.actions[a]:
                    raise ArenaError("unknown action %s for agent %s" % (act, a))
            if not targets:
                raise ArenaError("empty successor set for state %s" % q)
            for t in targets:
                if t not in self._state_index:
                    raise ArenaError("transition to unknown state %s" % t)
        for q in self.states:
            for c in self.joint_actions():
                if (q, c) not in self.transitions:
                    raise ArenaError(
                        "non-serial transition relation: state %s has no successor under %r" % (q, c))

    @property
    def props(self):
        visible = frozenset().union(*self.observes.values()) if self.observes else frozenset()
        return visible | self.hidden

    def joint_actions(self):
        """All joint actions, in the canonical per-agent order."""
        return itertools.product(*(self.actions[a] for a in self.agents))

    def coalition_tuple(self, coalition):
        """Canonical ordering of a coalition: arena agent order."""
        members = set(coalition)
        unknown = members - set(self.agents)
        if unknown:
            raise ArenaError("unknown coalition members %s" % sorted(unknown))
        return tuple(a for a in self.agents if a in members)

    def coalition_props(self, coalition):
        members = self.coalition_tuple(coalition)
        if not members:
            return frozenset()
        return frozenset().union(*(self.observes[a] for a in members))

    def coalition_actions(self, coalition):
        """All coalition action tuples, aligned with coalition_tuple order."""
        members = self.coalition_tuple(coalition)
        return list(itertools.product(*(self.actions[a] for a in members)))

    def extensions(self, coalition, c_a):
        """All joint actions agreeing with the coalition action c_a on the coalition."""
        members = self.coalition_tuple(coalition)
        assignment = dict(zip(members, c_a))
        pools = [(assignment[a],) if a in assignment else self.actions[a] for a in self.agents]
        return itertools.product(*pools)

    def restrict_action(self, coalition, c):
        """Project a joint action onto the coalition."""
        members = set(self.coalition_tuple(coalition))
        return tuple(act for a, act in zip(self.agents, c) if a in members)

    def succ(self, q, c):
        return self.transitions[(q, tuple(c))]

    def obs(self, coalition, q):
        """The coalition's observation of a state: its label restricted to visible props."""
        if q not in self._state_index:
            raise ArenaError("unknown state %s" % q)
        return self.labels[q] & self.coalition_props(coalition)

    def out(self, source, coalition, c_a, z):
        """Successors of the source set under c_a whose coalition observation is exactly z.

        Props visible to the coalition but outside z must be false at the successor.
        """
        z = frozenset(z)
        result = set()
        for c in self.extensions(coalition, c_a):
            for s in source:
                for t in self.succ(s, c):
                    if self.obs(coalition, t) == z:
                        result.add(t)
        return frozenset(result)

    def outcome_classes(self, source, coalition, c_a):
        """Group all successors of the source set under extensions of c_a by
        their coalition observation. Returns {observation: successor set}."""
        classes = {}
        for c in self.extensions(coalition, c_a):
            for s in source:
                for t in self.succ(s, c):
                    classes.setdefault(self.obs(coalition, t), set()).add(t)
        return {z: frozenset(members) for z, members in classes.items()}

    def state_sort_key(self, q):
        return self._state_index[q]

    def sorted_states(self, states):
        return sorted(states, key=self.state_sort_key)

    def with_prop(self, prop, true_states, hidden=True):
        """A copy of the arena with one more prop, labeling exactly the given states."""
        if prop in self.props:
            raise ArenaError("prop %s already declared" % prop)
        true_states = set(true_states)
        labels = {q: (self.labels[q] | {prop}) if q in true_states else self.labels[q]
                  for q in self.states}
        if hidden:
            observes = self.observes
            hidden_props = self.hidden | {prop}
        else:
            observes = {a: self.observes[a] | {prop} for a in self.agents}
            hidden_props = self.hidden
        return Arena(self.agents, self.actions, self.states, labels, self.initial,
                     observes, hidden_props, self.transitions)

    def to_document(self):
        """Serialize back to the arena document schema."""
        doc = {
            "agents": [
                {"name": a, "actions": list(self.actions[a]), "observes": sorted(self.observes[a])}
                for a in self.agents
            ],
            "hidden_props": sorted(self.hidden),
            "states": [{"id": q, "labels": sorted(self.labels[q])} for q in self.states],
            "initial": list(self.initial),
            "transitions": [
                {"from": q, "actions": {a: act for a, act in zip(self.agents, c)},
                 "to": self.sorted_states(targets)}
                for (q, c), targets in sorted(
                    self.transitions.items(),
                    key=lambda item: (self._state_index[item[0][0]], item[0][1]))
            ],
        }
        return doc

    def dump(self, path):
        with open(path, "w") as handle:
            json.dump(self.to_document(), handle, indent=2)
            handle.write("\n")


SINK_ID = "sink"


def _require(condition, message):
    if not condition:
        raise ArenaError(message)


def load_arena(document, allow_reserved=False):
    """Build a validated Arena from a document (dict, JSON text, or file path).

    With "complete_with_sink" set, a fresh sink state with an empty label and
    self-loops on every joint action absorbs all otherwise missing (state,
    joint action) pairs. Prop names using the reserved fresh-prop character are
    rejected unless allow_reserved is set (dumps of labeled arena levels carry
    such props legitimately).
    """
    if isinstance(document, str):
        if document.lstrip().startswith("{"):
            document = json.loads(document)
        else:
            with open(document) as handle:
                document = json.load(handle)
    _require(isinstance(document, dict), "arena document must be an object")
    for field in ("agents", "states", "initial", "transitions"):
        _require(field in document, "arena document missing %r" % field)

    agents = []
    actions = {}
    observes = {}
    _require(isinstance(document["agents"], list) and document["agents"],
             "agents must be a nonempty list")
    for entry in document["agents"]:
        _require(isinstance(entry, dict) and "name" in entry and "actions" in entry,
                 "each agent needs a name and actions")
        name = entry["name"]
        _require(name not in actions, "duplicate agent %s" % name)
        agents.append(name)
        _require(isinstance(entry["actions"], list) and entry["actions"],
                 "agent %s needs a nonempty action list" % name)
        actions[name] = list(entry["actions"])
        observes[name] = set(entry.get("observes", []))

    hidden = set(document.get("hidden_props", []))
    visible = set().union(*observes.values()) if observes else set()
    overlap = hidden & visible
    _require(not overlap, "props both hidden and observed: %s" % sorted(overlap))
    if not allow_reserved:
        for prop in visible | hidden:
            _require(FRESH_MARK not in prop,
                     "prop name %r uses the reserved %r character" % (prop, FRESH_MARK))

    states = []
    labels = {}
    for entry in document["states"]:
        _require(isinstance(entry, dict) and "id" in entry, "each state needs an id")
        q = entry["id"]
        _require(q not in labels, "duplicate state id %s" % q)
        states.append(q)
        labels[q] = set(entry.get("labels", []))

    initial = list(document["initial"])
    _require(initial, "initial state list is empty")

    transitions = {}
    for entry in document["transitions"]:
        _require(isinstance(entry, dict) and "from" in entry and "actions" in entry
                 and "to" in entry, "each transition needs from, actions, to")
        q = entry["from"]
        action_map = entry["actions"]
        _require(isinstance(action_map, dict), "transition actions must be an object")
        _require(set(action_map) == set(agents),
                 "transition from %s must assign an action to every agent" % q)
        c = tuple(action_map[a] for a in agents)
        key = (q, c)
        transitions.setdefault(key, set()).update(entry["to"])

    if document.get("complete_with_sink", False):
        _require(SINK_ID not in labels, "state id %r is reserved for the sink" % SINK_ID)
        states.append(SINK_ID)
        labels[SINK_ID] = set()
        all_joint = list(itertools.product(*(actions[a] for a in agents)))
        for q in states:
            for c in all_joint:
                if (q, c) not in transitions:
                    transitions[(q, c)] = {SINK_ID}

    return Arena(agents, actions, states, labels, initial, observes, hidden, transitions)


class Run:
    """A finite run: states r[0..n] connected by joint actions a[0..n-1]."""

    def __init__(self, states, actions=()):
        self.states = tuple(states)
        self.actions = tuple(tuple(a) for a in actions)
        if not self.states:
            raise ArenaError("a run needs at least one state")
        if len(self.actions) != len(self.states) - 1:
            raise ArenaError("run has %d actions for %d states"
                             % (len(self.actions), len(self.states)))

    def __len__(self):
        """Number of transitions."""
        return len(self.actions)

    def __eq__(self, other):
        return (isinstance(other, Run) and self.states == other.states
                and self.actions == other.actions)

    def __hash__(self):
        return hash((self.states, self.actions))

    def __repr__(self):
        parts = [self.states[0]]
        for act, q in zip(self.actions, self.states[1:]):
            parts.append("-%s->" % (act,))
            parts.append(q)
        return "Run(%s)" % " ".join(str(p) for p in parts)

    @property
    def last(self):
        return self.states[-1]

    def extend(self, action, state):
        return Run(self.states + (state,), self.actions + (tuple(action),))

    def is_initialized(self, arena):
        return self.states[0] in arena.initial

    def is_valid(self, arena):
        for q, c, q2 in zip(self.states, self.actions, self.states[1:]):
            if q2 not in arena.succ(q, c):
                return False
        return True


def obs_equiv(arena, coalition, run1, run2):
    """Observational equivalence: equal length, equal coalition-projected actions
    at every step, equal coalition observations at every position."""
    if len(run1) != len(run2):
        return False
    for c1, c2 in zip(run1.actions, run2.actions):
        if arena.restrict_action(coalition, c1) != arena.restrict_action(coalition, c2):
            return False
    for q1, q2 in zip(run1.states, run2.states):
        if arena.obs(coalition, q1) != arena.obs(coalition, q2):
            return False
    return True


class Strategy:
    """A finite observation-based strategy: a map from coalition observation
    histories to coalition actions, with a default for unmapped histories."""

    def __init__(self, coalition_members, mapping, default):
        self.coalition = tuple(coalition_members)
        self.mapping = {tuple(frozenset(z) for z in history): tuple(action)
                        for history, action in mapping.items()}
        self.default = tuple(default)

    def action(self, history):
        return self.mapping.get(tuple(frozenset(z) for z in history), self.default)

    def _action_map(self, action):
        return {a: act for a, act in zip(self.coalition, action)}

    def to_document(self):
        entries = []
        for history in sorted(self.mapping, key=lambda h: (len(h), [sorted(z) for z in h])):
            entries.append({
                "history": [sorted(z) for z in history],
                "action": self._action_map(self.mapping[history]),
            })
        return {
            "coalition": list(self.coalition),
            "default": self._action_map(self.default),
            "map": entries,
        }

    @classmethod
    def from_document(cls, doc):
        mapping = {
            tuple(frozenset(z) for z in entry["history"]):
                tuple(entry["action"][a] for a in doc["coalition"])
            for entry in doc["map"]
        }
        default = tuple(doc["default"][a] for a in doc["coalition"])
        return cls(doc["coalition"], mapping, default)
