"""Model checker for coalition strategies under imperfect information with
perfect recall and distributed knowledge.

The pipeline: parse a formula, desugar it to the core connectives, enumerate
its subformulas, and label a growing sequence of arenas one subformula at a
time. Each knowledge or strategy operator refines the current arena by the
subset construction for the coalition's pooled observations; until and weak
until goals are decided per knowledge set by building a tree automaton over
obligation pairs and solving its emptiness game.
"""

from .arena import (
    SINK_ID,
    Arena,
    ArenaError,
    Run,
    Strategy,
    load_arena,
    obs_equiv,
)
from .checker import (
    DEFAULT_STATE_CAP,
    CheckerError,
    LabelingTable,
    LabelLevel,
    StateCapExceeded,
    Verdict,
    bind_formula,
    explain,
    label_step,
    model_check,
)
from .corpus import alicebob_path, load_alicebob
from .emptiness import (
    DEFAULT_ORACLE_GUARD,
    EmptinessError,
    GameSolution,
    check_until_nonempty,
    check_weak_nonempty,
    extract_witness_strategy,
    generic_occurrence_emptiness,
    until_accept,
    weak_accept,
)
from .epistemic_split import (
    HatArena,
    HatState,
    SplitLimitExceeded,
    label_knowledge,
    label_next,
    lift_run,
    project_run,
    split,
)
from .formula import (
    Formula,
    FormulaError,
    ParseError,
    desugar,
    enumerate_subformulas,
    parse_formula,
)
from .strategy_automata import (
    BOT,
    AutomatonError,
    AutomatonState,
    TreeAutomaton,
    build_until_automaton,
    build_weak_until_automaton,
    to_dot,
)

__version__ = "0.1.0"

__all__ = [
    "Arena", "ArenaError", "Run", "Strategy", "SINK_ID", "load_arena", "obs_equiv",
    "Formula", "FormulaError", "ParseError", "parse_formula", "desugar",
    "enumerate_subformulas",
    "HatArena", "HatState", "SplitLimitExceeded", "split",
    "label_knowledge", "label_next", "lift_run", "project_run",
    "AutomatonError", "AutomatonState", "BOT", "TreeAutomaton",
    "build_until_automaton", "build_weak_until_automaton", "to_dot",
    "EmptinessError", "GameSolution", "DEFAULT_ORACLE_GUARD",
    "check_until_nonempty", "check_weak_nonempty", "generic_occurrence_emptiness",
    "until_accept", "weak_accept", "extract_witness_strategy",
    "CheckerError", "StateCapExceeded", "LabelLevel", "LabelingTable", "Verdict",
    "DEFAULT_STATE_CAP", "bind_formula", "label_step", "model_check", "explain",
    "alicebob_path", "load_alicebob",
    "__version__",
]
