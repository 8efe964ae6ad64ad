import random

import pytest

from depinsim.errors import DuplicateLock, InsufficientBalance, InsufficientLocked, UnknownJob
from depinsim.ledger import Ledger


class TestLock:
    def test_moves_funds_into_lock(self):
        led = Ledger({"c": 100})
        led.lock("c", 1, 10, 2)
        assert led.balance("c") == 88
        assert (led.locked[1].reward, led.locked[1].gas) == (10, 2)
        assert led.audit() is None

    def test_insufficient_balance_leaves_state(self):
        led = Ledger({"c": 5})
        with pytest.raises(InsufficientBalance):
            led.lock("c", 1, 10, 2)
        assert led.balance("c") == 5 and not led.locked

    def test_duplicate(self):
        led = Ledger({"c": 100})
        led.lock("c", 1, 1, 1)
        with pytest.raises(DuplicateLock):
            led.lock("c", 1, 1, 1)


class TestPaySlot:
    def test_pays_processor(self):
        led = Ledger({"c": 12})
        led.lock("c", 1, 10, 2)
        led.pay_slot(1, "p", 5, 1)
        assert (led.locked[1].reward, led.locked[1].gas) == (5, 1)
        assert led.balance("p") == 6
        assert led.audit() is None

    def test_overdraw(self):
        led = Ledger({"c": 12})
        led.lock("c", 1, 10, 2)
        with pytest.raises(InsufficientLocked):
            led.pay_slot(1, "p", 11, 0)
        assert led.locked[1].reward == 10

    def test_zero_is_noop(self):
        led = Ledger({"c": 12})
        led.lock("c", 1, 10, 2)
        led.pay_slot(1, "p", 0, 0)
        assert led.locked[1].total == 12 and led.audit() is None


class TestRefund:
    def test_returns_remaining(self):
        led = Ledger({"c": 6})
        led.lock("c", 1, 5, 1)
        assert led.refund(1, "c") == 6
        assert led.balance("c") == 6 and 1 not in led.locked

    def test_empty_lock(self):
        led = Ledger({"c": 0})
        led.lock("c", 1, 0, 0)
        assert led.refund(1, "c") == 0

    def test_unknown(self):
        with pytest.raises(UnknownJob):
            Ledger().refund(9, "c")


class TestAudit:
    def test_empty(self):
        assert Ledger().audit() is None

    def test_detects_corruption(self):
        led = Ledger({"c": 10})
        led.balances["c"] = 11
        assert "conservation" in led.audit()

    def test_detects_negative(self):
        led = Ledger({"c": 10})
        led.balances["c"] = -1
        led.balances["d"] = 11
        assert "negative" in led.audit()


def random_ops(rng, led, steps, accounts):
    """Apply random lock/pay/refund calls; domain errors are expected and ignored."""
    next_job = 1
    for _ in range(steps):
        op = rng.random()
        try:
            if op < 0.4:
                led.lock(rng.choice(accounts), next_job, rng.randint(0, 50), rng.randint(0, 10))
                next_job += 1
            elif op < 0.8 and led.locked:
                job = rng.choice(sorted(led.locked))
                led.pay_slot(job, rng.choice(accounts), rng.randint(0, 20), rng.randint(0, 5))
            elif led.locked:
                led.refund(rng.choice(sorted(led.locked)), rng.choice(accounts))
        except (InsufficientBalance, InsufficientLocked):
            pass
        assert led.audit() is None
        assert all(v >= 0 for v in led.balances.values())


def test_conservation_random_sequences():
    rng = random.Random(11)
    for _ in range(200):
        led = Ledger({"a": rng.randint(0, 500), "b": rng.randint(0, 500)})
        random_ops(rng, led, 40, ["a", "b", "p"])
