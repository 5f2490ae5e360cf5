"""The labeling driver: build the arena sequence, label each level with a fresh
prop for one subformula, and read the verdict off the final initial states."""

from __future__ import annotations

import time

from . import formula as fm
from .arena import Strategy
from .emptiness import check_until_nonempty, check_weak_nonempty, extract_witness_strategy
from .epistemic_split import SplitLimitExceeded, label_knowledge, label_next, split
from .strategy_automata import build_until_automaton, build_weak_until_automaton

DEFAULT_STATE_CAP = 10 ** 6

CASE_ATOM = "atom"
CASE_BOOLEAN = "boolean"
CASE_KNOWLEDGE = "knowledge"
CASE_NEXT = "next"
CASE_UNTIL = "until"
CASE_WEAK_UNTIL = "weak-until"

MODAL_CASES = (CASE_KNOWLEDGE, CASE_NEXT, CASE_UNTIL, CASE_WEAK_UNTIL)


class CheckerError(Exception):
    pass


class StateCapExceeded(CheckerError):
    pass


class LabelLevel:
    """One step of the arena sequence: the arena after labeling, the truth map
    for the fresh prop, the labeling case, and provenance to the previous level."""

    def __init__(self, k, chi, prop, case, arena, labels, provenance,
                 hat=None, coalition=None, automata=None, solutions=None, elapsed=0.0):
        self.k = k
        self.chi = chi
        self.prop = prop
        self.case = case
        self.arena = arena
        self.labels = labels
        self.provenance = provenance
        self.hat = hat
        self.coalition = coalition
        self.automata = automata or {}
        self.solutions = solutions or {}
        self.elapsed = elapsed

    @property
    def labeled_count(self):
        return sum(1 for v in self.labels.values() if v)

    def stats(self):
        return {"k": self.k, "case": self.case,
                "states": len(self.arena.states), "labeled": self.labeled_count}


class LabelingTable:
    """The whole arena sequence with per-level labels and provenance links."""

    def __init__(self, base):
        self.base = base
        self.levels = []

    def arena_at(self, k):
        if k == 0:
            return self.base
        return self.levels[k - 1].arena

    def __iter__(self):
        return iter(self.levels)

    def __len__(self):
        return len(self.levels)


class Verdict:
    """The final answer plus everything needed to explain it."""

    def __init__(self, holds, formula_text, table, initial, total_seconds):
        self.holds = holds
        self.formula = formula_text
        self.table = table
        self.initial = initial
        self.total_seconds = total_seconds

    def to_document(self):
        return {
            "holds": self.holds,
            "formula": self.formula,
            "levels": [level.stats() for level in self.table],
            "initial": [{"state": q, "label": v} for q, v in self.initial],
        }

    def witness(self):
        """Strategy for the outermost positive until or weak-until level, merged
        over the initial knowledge sets; None when no such level is positive."""
        for level in reversed(self.table.levels):
            if level.case not in (CASE_UNTIL, CASE_WEAK_UNTIL):
                continue
            hat = level.hat
            initial_ids = hat.arena.initial
            if not all(level.labels[hid] for hid in initial_ids):
                return None
            merged = {}
            members = hat.source.coalition_tuple(hat.coalition)
            default = None
            for hid in initial_ids:
                s = hat.kset[hid]
                nonempty, solution = level.solutions[s]
                strategy = extract_witness_strategy(solution, level.automata[s], hat)
                merged.update(strategy.mapping)
                default = strategy.default
            return Strategy(members, merged, default)
        return None


def _is_atom_case(chi):
    return isinstance(chi, (fm.Atom, fm.TrueConst, fm.FalseConst))


def _eval_boolean(chi, label):
    if isinstance(chi, fm.Atom):
        return chi.name in label
    if isinstance(chi, fm.TrueConst):
        return True
    if isinstance(chi, fm.FalseConst):
        return False
    if isinstance(chi, fm.Not):
        return not _eval_boolean(chi.operand, label)
    if isinstance(chi, fm.And):
        return _eval_boolean(chi.left, label) and _eval_boolean(chi.right, label)
    raise CheckerError("not a boolean combination: %s" % chi)


def _check_atoms_labeled(chi, arena):
    missing = fm.atom_names(chi) - arena.props
    if missing:
        raise CheckerError("unlabeled atoms in %s: %s" % (chi, sorted(missing)))


def _operand_atom(operand, chi):
    if not isinstance(operand, fm.Atom):
        raise CheckerError("modal operand of %s must be an atom" % chi)
    return operand.name


def label_step(arena, chi, prop, state_cap=DEFAULT_STATE_CAP):
    """Label one level: dispatch on the shape of the reduced formula chi.

    Boolean combinations keep the state space and evaluate pointwise; modal
    formulas split the arena by their coalition first. The fresh prop is hidden,
    so later splits are unaffected by it.
    """
    started = time.monotonic()
    modal_count = fm.count_modalities(chi)
    if modal_count > 1:
        raise CheckerError("reduced formula has more than one modality: %s" % chi)
    _check_atoms_labeled(chi, arena)

    if modal_count == 0:
        case = CASE_ATOM if _is_atom_case(chi) else CASE_BOOLEAN
        labels = {q: _eval_boolean(chi, arena.labels[q]) for q in arena.states}
        new_arena = arena.with_prop(prop, [q for q in arena.states if labels[q]])
        provenance = {q: q for q in arena.states}
        return LabelLevel(0, chi, prop, case, new_arena, labels, provenance,
                          elapsed=time.monotonic() - started)

    if not isinstance(chi, (fm.Know, fm.Next, fm.Until, fm.WeakUntil)):
        raise CheckerError("the modality in %s must be outermost" % chi)

    coalition = chi.coalition
    try:
        hat = split(arena, coalition, limit=state_cap)
    except SplitLimitExceeded as exc:
        raise StateCapExceeded(str(exc)) from exc

    automata = {}
    solutions = {}
    if isinstance(chi, fm.Know):
        case = CASE_KNOWLEDGE
        labels = label_knowledge(hat, _operand_atom(chi.operand, chi))
    elif isinstance(chi, fm.Next):
        case = CASE_NEXT
        labels = label_next(hat, coalition, _operand_atom(chi.operand, chi))
    else:
        p1 = _operand_atom(chi.left, chi)
        p2 = _operand_atom(chi.right, chi)
        if isinstance(chi, fm.Until):
            case = CASE_UNTIL
            build, decide = build_until_automaton, check_until_nonempty
        else:
            case = CASE_WEAK_UNTIL
            build, decide = build_weak_until_automaton, check_weak_nonempty
        per_kset = {}
        for s in hat.ksets:
            automaton = build(hat, coalition, p1, p2, s)
            nonempty, solution = decide(automaton)
            automata[s] = automaton
            solutions[s] = (nonempty, solution)
            per_kset[s] = nonempty
        labels = {hid: per_kset[hat.kset[hid]] for hid in hat.arena.states}

    new_arena = hat.arena.with_prop(prop, [hid for hid in hat.arena.states if labels[hid]])
    return LabelLevel(0, chi, prop, case, new_arena, labels, hat.base,
                      hat=hat, coalition=coalition, automata=automata, solutions=solutions,
                      elapsed=time.monotonic() - started)


def bind_formula(arena, f):
    """Check that the formula's coalitions and atoms exist in the arena."""
    for coalition in fm.coalitions(f):
        unknown = set(coalition) - set(arena.agents)
        if unknown:
            raise CheckerError("unknown coalition members %s in %s" % (sorted(unknown), f))
    missing = fm.atom_names(f) - arena.props
    if missing:
        raise CheckerError("unknown props in formula: %s" % sorted(missing))


def model_check(arena, f, state_cap=DEFAULT_STATE_CAP):
    """Decide whether the formula is valid in the arena (true at every initial
    state), building one labeling level per subformula."""
    if isinstance(f, str):
        f = fm.parse_formula(f)
    formula_text = str(f)
    bind_formula(arena, f)
    core = fm.desugar(f)
    enumeration = fm.enumerate_subformulas(core)
    started = time.monotonic()
    table = LabelingTable(arena)
    current = arena
    for entry in enumeration:
        level = label_step(current, entry.chi, entry.prop, state_cap=state_cap)
        level.k = entry.index
        table.levels.append(level)
        current = level.arena
    top_prop = enumeration.top.prop
    initial = [(q, top_prop in current.labels[q]) for q in current.initial]
    holds = all(v for _, v in initial)
    return Verdict(holds, formula_text, table, initial, time.monotonic() - started)


def explain(verdict, state_id):
    """Trace a state at its deepest level back to the base arena, reporting the
    label contributed at every step."""
    table = verdict.table
    top_level = None
    for level in reversed(table.levels):
        if state_id in level.arena.labels:
            top_level = level
            break
    chain = []
    witness = None
    if top_level is None:
        if state_id not in table.base.labels:
            raise CheckerError("unknown state id %s" % state_id)
    else:
        current = state_id
        index = table.levels.index(top_level)
        for level in reversed(table.levels[:index + 1]):
            entry = {
                "level": level.k,
                "state": current,
                "case": level.case,
                "prop": level.prop,
                "labeled": level.labels[current],
            }
            if level.case in MODAL_CASES:
                entry["kset"] = level.hat.source.sorted_states(level.hat.kset[current])
            chain.append(entry)
            current = level.provenance[current]
        state_id_base = current
        if top_level.case in (CASE_UNTIL, CASE_WEAK_UNTIL) and chain[0]["labeled"]:
            hat = top_level.hat
            s = hat.kset[chain[0]["state"]]
            nonempty, solution = top_level.solutions[s]
            if nonempty:
                strategy = extract_witness_strategy(solution, top_level.automata[s], hat)
                witness = strategy.to_document()
        state_id = state_id_base
    record = {
        "state": state_id,
        "base_labels": sorted(table.base.labels[state_id]),
        "chain": chain,
    }
    if witness is not None:
        record["witness"] = witness
    return record
