"""Knowledge-set refinement: construction, invariants, and label oracles."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from atldk import (
    Run,
    SplitLimitExceeded,
    label_knowledge,
    label_next,
    lift_run,
    load_alicebob,
    load_arena,
    project_run,
    split,
)
from oracles import (
    equivalence_classes,
    hat_state_of,
    initialized_runs,
    knowledge_oracle,
    next_oracle,
    obs_signature,
    random_arena,
    random_coalition,
    resplit_isomorphism_failures,
)

AB = ["Alice", "Bob"]


@pytest.fixture(scope="module")
def corpus():
    return load_alicebob()


@pytest.fixture(scope="module")
def corpus_hat(corpus):
    return split(corpus, AB)


class TestCorpusSplit:
    def test_state_count_and_ids(self, corpus_hat):
        assert len(corpus_hat.arena.states) == 16
        assert "q1@{q1,q2,q3}" in corpus_hat.arena.states
        assert "q4@{q4}" in corpus_hat.arena.states

    def test_initial(self, corpus_hat):
        assert corpus_hat.arena.initial == ("q0@{q0}",)

    def test_exactly_one_non_singleton_kset(self, corpus_hat):
        non_singleton = {s for s in corpus_hat.ksets if len(s) > 1}
        assert non_singleton == {frozenset({"q1", "q2", "q3"})}

    def test_deal_step_branches_into_the_shared_kset(self, corpus_hat):
        successors = corpus_hat.arena.succ("q0@{q0}", ("g", "g"))
        assert successors == frozenset(
            {"q1@{q1,q2,q3}", "q2@{q1,q2,q3}", "q3@{q1,q2,q3}"})

    def test_reveal_step_collapses_the_kset(self, corpus_hat):
        assert corpus_hat.arena.succ("q1@{q1,q2,q3}", ("i", "i")) == frozenset({"q4@{q4}"})
        assert corpus_hat.arena.succ("q2@{q1,q2,q3}", ("i", "i")) == frozenset({"q5@{q5}"})

    def test_labels_copied_from_base(self, corpus, corpus_hat):
        for hid in corpus_hat.arena.states:
            assert corpus_hat.arena.labels[hid] == corpus.labels[corpus_hat.base[hid]]

    def test_single_agent_view_keeps_states_merged(self, corpus):
        hat = split(corpus, ["Alice"])
        assert hat.arena.succ("q2@{q1,q2,q3}", ("i", "i")) == frozenset({"q5@{q5,q6}"})
        assert hat.arena.succ("q3@{q1,q2,q3}", ("i", "i")) == frozenset({"q6@{q5,q6}"})

    def test_split_is_deterministic(self, corpus, corpus_hat):
        again = split(corpus, AB)
        assert again.arena.states == corpus_hat.arena.states
        assert again.arena.transitions == corpus_hat.arena.transitions
        assert again.arena.initial == corpus_hat.arena.initial

    def test_limit_aborts(self, corpus):
        with pytest.raises(SplitLimitExceeded):
            split(corpus, AB, limit=5)
        split(corpus, AB, limit=16)


class TestInitialGrouping:
    def doc(self, labels0, labels1):
        return {
            "agents": [{"name": "a1", "actions": ["a"], "observes": ["p"]},
                       {"name": "a2", "actions": ["a"], "observes": []}],
            "states": [{"id": "i0", "labels": labels0}, {"id": "i1", "labels": labels1}],
            "initial": ["i0", "i1"],
            "transitions": [
                {"from": "i0", "actions": {"a1": "a", "a2": "a"}, "to": ["i0"]},
                {"from": "i1", "actions": {"a1": "a", "a2": "a"}, "to": ["i1"]},
            ],
        }

    def test_indistinguishable_initials_share_a_kset(self):
        hat = split(load_arena(self.doc(["p"], ["p"])), ["a1"])
        assert set(hat.arena.initial) == {"i0@{i0,i1}", "i1@{i0,i1}"}

    def test_distinguishable_initials_split(self):
        hat = split(load_arena(self.doc(["p"], [])), ["a1"])
        assert set(hat.arena.initial) == {"i0@{i0}", "i1@{i1}"}


class TestSplitInvariants:
    @settings(max_examples=80, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_base_in_kset_and_obs_coherence(self, seed):
        rng = random.Random(seed)
        g = random_arena(rng)
        coalition = random_coalition(rng)
        hat = split(g, coalition)
        for hid in hat.arena.states:
            s = hat.kset[hid]
            assert hat.base[hid] in s
            views = {g.obs(coalition, q) for q in s}
            assert len(views) == 1

    @settings(max_examples=80, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_refined_arena_is_serial_and_preserves_observability(self, seed):
        rng = random.Random(seed)
        g = random_arena(rng)
        coalition = random_coalition(rng)
        hat = split(g, coalition)
        assert hat.arena.agents == g.agents
        assert hat.arena.observes == g.observes
        for hid in hat.arena.states:
            for c in hat.arena.joint_actions():
                targets = hat.arena.succ(hid, c)
                assert targets
                assert {hat.base[t] for t in targets} == set(g.succ(hat.base[hid], c))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_unique_label_full_obs_ksets_are_singletons(self, seed):
        rng = random.Random(seed)
        g = random_arena(rng, full_obs=True, unique_labels=True)
        coalition = random_coalition(rng)
        hat = split(g, coalition)
        for hid in hat.arena.states:
            assert hat.kset[hid] == frozenset({hat.base[hid]})

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_kset_matches_run_equivalence_classes(self, seed):
        rng = random.Random(seed)
        g = random_arena(rng, max_states=3)
        coalition = random_coalition(rng)
        hat = split(g, coalition)
        runs = initialized_runs(g, 3)
        classes = equivalence_classes(g, coalition, runs)
        for run in runs:
            hid = hat_state_of(g, hat, run)
            mates = classes[obs_signature(g, coalition, run)]
            assert hat.kset[hid] == frozenset(r.last for r in mates)


class TestLiftProject:
    def test_corpus_round_trip(self, corpus, corpus_hat):
        run = Run(["q0", "q1", "q4", "q7"], [("g", "g"), ("i", "i"), ("e", "e")])
        lifted = lift_run(corpus, corpus_hat, run)
        assert lifted.states == ("q0@{q0}", "q1@{q1,q2,q3}", "q4@{q4}", "q7@{q7}")
        assert project_run(corpus_hat, lifted) == run

    def test_lift_rejects_bad_runs(self, corpus, corpus_hat):
        from atldk import ArenaError
        with pytest.raises(ArenaError):
            lift_run(corpus, corpus_hat, Run(["q1"]))
        with pytest.raises(ArenaError):
            lift_run(corpus, corpus_hat, Run(["q0", "q4"], [("g", "g")]))

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_every_initialized_run_lifts_uniquely(self, seed):
        rng = random.Random(seed)
        g = random_arena(rng, max_states=3)
        coalition = random_coalition(rng)
        hat = split(g, coalition)
        for run in initialized_runs(g, 2):
            lifted = lift_run(g, hat, run)
            assert lifted.is_valid(hat.arena)
            assert lifted.is_initialized(hat.arena)
            assert project_run(hat, lifted) == run


class TestKnowledgeLabels:
    def test_corpus_knowledge_golden(self, corpus, corpus_hat):
        labels = label_knowledge(corpus_hat, "valid")
        assert labels["q1@{q1,q2,q3}"]
        assert labels["q0@{q0}"]
        assert not labels["sink@{sink}"]

    def test_kset_members_share_the_verdict(self, corpus_hat):
        labels = label_knowledge(corpus_hat, "yx")
        shared = [labels["q%d@{q1,q2,q3}" % i] for i in (1, 2, 3)]
        assert shared == [False, False, False]

    def test_unknown_prop(self, corpus_hat):
        from atldk import ArenaError
        with pytest.raises(ArenaError):
            label_knowledge(corpus_hat, "nope")

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_matches_run_enumeration_oracle(self, seed):
        rng = random.Random(seed)
        g = random_arena(rng, max_states=3)
        if not g.props:
            return
        coalition = random_coalition(rng)
        prop = rng.choice(sorted(g.props))
        hat = split(g, coalition)
        labels = label_knowledge(hat, prop)
        runs = initialized_runs(g, 3)
        expected = knowledge_oracle(g, coalition, prop, runs)
        for run in runs:
            assert labels[hat_state_of(g, hat, run)] == expected[run], (run, prop)


class TestNextLabels:
    def test_corpus_next_golden(self, corpus):
        goal = corpus.with_prop("paid", ["q12", "q13"])
        hat = split(goal, AB)
        labels = label_next(hat, AB, "paid")
        assert labels["q9@{q9}"]
        assert labels["q12@{q12}"]
        assert not labels["q14@{q14}"]
        assert not labels["q0@{q0}"]

    def test_coalition_must_match_the_split(self, corpus_hat):
        from atldk import ArenaError
        with pytest.raises(ArenaError):
            label_next(corpus_hat, ["Alice"], "valid")

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_matches_run_enumeration_oracle(self, seed):
        rng = random.Random(seed)
        g = random_arena(rng, max_states=3)
        if not g.props:
            return
        coalition = random_coalition(rng)
        prop = rng.choice(sorted(g.props))
        hat = split(g, coalition)
        labels = label_next(hat, coalition, prop)
        runs = initialized_runs(g, 2)
        expected = next_oracle(g, coalition, prop, runs)
        for run in runs:
            assert labels[hat_state_of(g, hat, run)] == expected[run], (run, prop)


class TestResplit:
    def test_corpus_resplit_adds_nothing(self, corpus_hat):
        again = split(corpus_hat.arena, AB)
        assert resplit_isomorphism_failures(corpus_hat, again) == []

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 10 ** 6))
    def test_resplit_is_a_relabeling(self, seed):
        rng = random.Random(seed)
        g = random_arena(rng)
        coalition = random_coalition(rng)
        first = split(g, coalition)
        second = split(first.arena, coalition)
        assert resplit_isomorphism_failures(first, second) == []


class TestHatArenaHelpers:
    def test_states_with_kset(self, corpus_hat):
        shared = frozenset({"q1", "q2", "q3"})
        assert sorted(corpus_hat.states_with_kset(shared)) == [
            "q1@{q1,q2,q3}", "q2@{q1,q2,q3}", "q3@{q1,q2,q3}"]

    def test_same_kset(self, corpus_hat):
        assert corpus_hat.same_kset("q1@{q1,q2,q3}", "q2@{q1,q2,q3}")
        assert not corpus_hat.same_kset("q1@{q1,q2,q3}", "q4@{q4}")

    def test_require_kset(self, corpus_hat):
        from atldk import ArenaError
        assert corpus_hat.require_kset({"q1", "q2", "q3"}) == frozenset({"q1", "q2", "q3"})
        with pytest.raises(ArenaError):
            corpus_hat.require_kset({"q1", "q2"})
