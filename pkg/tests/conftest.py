import pytest

from pathfair.core import HubSpec, PathSpec, SystemParams, Transaction
from pathfair.routing import HONEST, Router, StampRule, TraversalMode
from pathfair.simnet import ClockModel, NetModel, Simulator, stream


class World:
    """A tiny network for driving single traversals by hand."""

    def __init__(self, n, corrupted=(), *, q=4, t=3, k=2, delta=10, skew=0, mode="iterative",
                 distribution="uniform", seed=0, cooperate=True,
                 stamp="threshold"):
        self.params = SystemParams(n=n, f=len(corrupted), q=q, t=t, k=k, delta_net=delta,
                                   delta_clock=skew)
        clock = ClockModel.perfect(n) if skew == 0 else ClockModel.sample(n, skew, seed)
        self.sim = Simulator(clock, NetModel(delta, 1, distribution), frozenset(corrupted))
        self.router = Router(self.sim, self.params, TraversalMode(mode), stream(seed, "delays"),
                             cooperate=cooperate, stamp=StampRule(stamp))

    def launch(self, path, deviation=HONEST, tx=None, delays=None):
        tx = tx or Transaction.synthetic(len(self.router.traversals), 0)
        delays = delays if delays is not None else self.router.draw_delays(path)
        trav = self.router.make(tx, path, delays, deviation)
        self.router.traversals.append(trav)
        self.sim.schedule(tx.submit_time, trav.launch)
        return trav

    def run(self):
        self.sim.run()


def make_path(*hubs, path_id=0, block=0):
    return PathSpec(path_id, tuple(HubSpec(tuple(h), j) for j, h in enumerate(hubs)), block)


@pytest.fixture
def world():
    return World


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
