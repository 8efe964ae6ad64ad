import random

from depinsim.ledger import Ledger
from depinsim.matching import Candidate, eligible, match
from depinsim.model import Personal, Selected, slot_count
from depinsim.registry import Registry

from conftest import make_processor, make_spec


def open_jobs(*specs):
    reg, led = Registry(), Ledger({"alice": 10**6, "bob": 10**6})
    for s in specs:
        reg.register_job(s, led)
    return reg.open_jobs()


def brute_eligible(spec, profile, rep, load):
    """Restatement of the rules, one clause per line."""
    rules = [load < profile.capacity]
    if isinstance(spec.mode, Personal):
        rules.append(profile.owner_id == spec.consumer_id)
    elif isinstance(spec.mode, Selected):
        rules.append(profile.processor_id in spec.mode.processor_ids)
    else:
        rules.append(rep >= spec.min_reputation)
        rules.append(spec.reward >= profile.price_floor * slot_count(spec.schedule))
    return all(rules)


class TestEligible:
    def test_public_ok(self):
        assert eligible(make_spec(reward=10, min_reputation=0.5), make_processor(floor=5), 0.8, 0)

    def test_public_price(self):
        assert not eligible(make_spec(reward=10, min_reputation=0.5), make_processor(floor=20), 0.9, 0)

    def test_personal_free(self):
        spec = make_spec(reward=0, mode=Personal(), consumer="alice")
        assert eligible(spec, make_processor(owner="alice", floor=100), 0.0, 0)
        assert not eligible(spec, make_processor(owner="bob"), 1.0, 0)

    def test_selected(self):
        spec = make_spec(mode=Selected(["p2"]))
        assert not eligible(spec, make_processor("p1"), 1.0, 0)
        assert eligible(spec, make_processor("p2"), 0.0, 0)

    def test_capacity(self):
        assert not eligible(make_spec(), make_processor(capacity=2), 1.0, 2)

    def test_reputation_ignored_outside_public(self):
        spec = make_spec(mode=Selected(["p1"]), min_reputation=0.99)
        assert eligible(spec, make_processor("p1"), 0.1, 0)

    def test_agrees_with_restatement(self):
        rng = random.Random(3)
        for _ in range(3000):
            mode = rng.choice([None, Personal(), Selected(["p1", "p3"])])
            spec = make_spec(
                consumer=rng.choice(["alice", "bob"]),
                reward=rng.randint(0, 30),
                slots=rng.randint(1, 4),
                mode=mode,
                min_reputation=rng.random(),
            )
            proc = make_processor(
                rng.choice(["p1", "p2", "p3"]),
                owner=rng.choice(["alice", "bob"]),
                capacity=rng.randint(1, 3),
                floor=rng.randint(0, 10),
            )
            rep, load = rng.random(), rng.randint(0, 3)
            assert eligible(spec, proc, rep, load) == brute_eligible(spec, proc, rep, load)


class TestMatch:
    def test_prefers_reputation(self):
        jobs = open_jobs(make_spec())
        cands = [Candidate(make_processor("a"), 0.8), Candidate(make_processor("b"), 0.9)]
        assert [p.processor_id for p in match(jobs, cands)] == ["b"]

    def test_then_cheaper_floor(self):
        jobs = open_jobs(make_spec(reward=10))
        cands = [Candidate(make_processor("a", floor=5), 0.5), Candidate(make_processor("b", floor=3), 0.5)]
        assert [p.processor_id for p in match(jobs, cands)] == ["b"]

    def test_then_smallest_id(self):
        jobs = open_jobs(make_spec())
        cands = [Candidate(make_processor("z"), 0.5), Candidate(make_processor("m"), 0.5)]
        assert match(jobs, cands)[0].processor_id == "m"

    def test_no_processors(self):
        assert match(open_jobs(make_spec()), []) == []

    def test_provisional_load(self):
        jobs = open_jobs(make_spec(), make_spec(), make_spec())
        cands = [Candidate(make_processor("a", capacity=2), 0.9), Candidate(make_processor("b"), 0.1)]
        assert [(p.job_id, p.processor_id) for p in match(jobs, cands)] == [(1, "a"), (2, "a"), (3, "b")]


def test_random_proposals_are_sound_and_capacity_safe():
    rng = random.Random(8)
    for _ in range(300):
        specs = [
            make_spec(
                consumer=rng.choice(["alice", "bob"]),
                reward=rng.randint(0, 20),
                mode=rng.choice([None, Personal(), Selected(["p1", "p2"])]),
                min_reputation=rng.random(),
            )
            for _ in range(rng.randint(1, 8))
        ]
        jobs = open_jobs(*specs)
        cands = [
            Candidate(
                make_processor(f"p{i}", owner=rng.choice(["alice", "bob"]), capacity=rng.randint(1, 3),
                               floor=rng.randint(0, 8)),
                rng.random(),
                rng.randint(0, 2),
            )
            for i in range(rng.randint(0, 4))
        ]
        props = match(jobs, cands)
        assert props == match(jobs, cands)
        assert len({p.job_id for p in props}) == len(props)
        by_id = {c.profile.processor_id: c for c in cands}
        spec_of = {j.job_id: j.spec for j in jobs}
        used = {}
        for p in props:
            c = by_id[p.processor_id]
            load = c.load + used.get(p.processor_id, 0)
            assert brute_eligible(spec_of[p.job_id], c.profile, c.reputation, load)
            used[p.processor_id] = used.get(p.processor_id, 0) + 1
        for pid, n in used.items():
            assert n <= by_id[pid].profile.capacity - by_id[pid].load


def test_refused_processor_is_skipped_for_that_job():
    jobs = open_jobs(make_spec(), make_spec())
    cands = [Candidate(make_processor("a", capacity=2), 0.9), Candidate(make_processor("b", capacity=2), 0.1)]
    props = match(jobs, cands, refused={1: {"a"}})
    assert [(p.job_id, p.processor_id) for p in props] == [(1, "b"), (2, "a")]
