import itertools

import pytest
from hypothesis import given, settings, strategies as st

from src.firmware.timeline import ResourceCalendar, Timeline, timeline_schedule
from src.models import PhysicalPageAddr, SubOp, SubRequest, Topology, TransactionPhases
from tests.helpers import BruteForceScheduler, OracleTransaction

# 2 channels x 2 dies, one plane each.
TOPOLOGY = Topology(channels=2, packages=1, dies=2, planes=1, blocks=4, pages=4)

PHASES = {
    "read": TransactionPhases(t_cmd=1, t_bus=2, t_cell=3),
    "write": TransactionPhases(t_cmd=1, t_bus=2, t_cell=4),
    "erase": TransactionPhases(t_cmd=1, t_bus=0, t_cell=5),
}
SUB_OPS = {"read": SubOp.READ, "write": SubOp.WRITE, "erase": SubOp.ERASE}


def schedule_both(transactions: list[tuple[str, int, int, int]]) -> None:
    """Schedule (op, channel, die, issue) tuples with the timeline and the oracle; they must agree."""
    timeline = Timeline(TOPOLOGY)
    oracle = BruteForceScheduler()
    for i, (op, channel, die, issue) in enumerate(transactions):
        phases = PHASES[op]
        sub = SubRequest(id=i, parent_id=None, op=SUB_OPS[op], lpn=None, issue_tick=issue)
        addr = PhysicalPageAddr(channel=channel, package=0, die=die, plane=0, block=0, page=0)
        record = timeline_schedule(sub, addr, phases, timeline)

        expected = oracle.schedule(OracleTransaction(
            op=op, channel=channel, die=channel * 2 + die, issue=issue,
            t_cmd=phases.t_cmd, t_bus=phases.t_bus, t_cell=phases.t_cell,
        ))
        assert (record.start_tick, record.finish_tick) == expected, transactions


class TestResourceCalendar:
    def test_reserve_coalesces_touching_intervals(self):
        calendar = ResourceCalendar()
        calendar.reserve(0, 5)
        calendar.reserve(10, 15)
        calendar.reserve(5, 10)

        assert calendar.starts == [0]
        assert calendar.ends == [15]
        assert calendar.busy_until == 15

    def test_reserve_rejects_overlap(self):
        calendar = ResourceCalendar()
        calendar.reserve(0, 5)
        with pytest.raises(ValueError):
            calendar.reserve(4, 6)

    def test_earliest_fit_uses_gaps(self):
        calendar = ResourceCalendar()
        calendar.reserve(0, 5)
        calendar.reserve(8, 20)

        assert calendar.earliest_fit(0, 3) == 5
        assert calendar.earliest_fit(0, 4) == 20
        assert calendar.earliest_fit(25, 4) == 25

    def test_is_free(self):
        calendar = ResourceCalendar()
        calendar.reserve(10, 20)

        assert calendar.is_free(0, 10)
        assert calendar.is_free(20, 30)
        assert not calendar.is_free(15, 16)
        assert not calendar.is_free(5, 25)

    def test_prune_keeps_busy_until(self):
        calendar = ResourceCalendar()
        calendar.reserve(0, 5)
        calendar.reserve(10, 20)
        calendar.prune(12)

        assert len(calendar) == 1
        assert calendar.busy_until == 20


class TestTimelineSchedule:
    def test_reads_on_different_dies_overlap_cells(self):
        """Two reads on one channel share the bus but not the cell phase."""
        timeline = Timeline(TOPOLOGY)
        phases = TransactionPhases(t_cmd=10, t_bus=100, t_cell=500)
        first, second = (
            timeline_schedule(
                SubRequest(id=i, parent_id=None, op=SubOp.READ, lpn=None),
                PhysicalPageAddr(channel=0, package=0, die=i, plane=0, block=0, page=0),
                phases,
                timeline,
            )
            for i in range(2)
        )

        assert second.cell_start < first.cell_end
        assert second.bus_start >= first.bus_end

    def test_same_die_serializes(self):
        timeline = Timeline(TOPOLOGY)
        phases = TransactionPhases(t_cmd=10, t_bus=100, t_cell=500)
        addr = PhysicalPageAddr(channel=1, package=0, die=1, plane=0, block=0, page=0)
        first = timeline_schedule(SubRequest(id=0, parent_id=None, op=SubOp.WRITE, lpn=0), addr, phases, timeline)
        second = timeline_schedule(SubRequest(id=1, parent_id=None, op=SubOp.WRITE, lpn=1), addr, phases, timeline)

        assert first.start_tick == 0
        assert first.finish_tick == 610
        assert second.start_tick == first.finish_tick

    def test_busy_until_views(self):
        timeline = Timeline(TOPOLOGY)
        addr = PhysicalPageAddr(channel=1, package=0, die=0, plane=0, block=0, page=0)
        timeline_schedule(SubRequest(id=0, parent_id=None, op=SubOp.ERASE, lpn=None), addr, PHASES["erase"], timeline)

        assert timeline.channel_busy_until == [0, 1]
        assert timeline.die_busy_until == [[[0, 0]], [[6, 0]]]

    def test_later_issue_can_fill_an_earlier_gap(self):
        timeline = Timeline(TOPOLOGY)
        addr = PhysicalPageAddr(channel=0, package=0, die=0, plane=0, block=0, page=0)
        late = SubRequest(id=0, parent_id=None, op=SubOp.WRITE, lpn=0, issue_tick=100)
        early = SubRequest(id=1, parent_id=None, op=SubOp.WRITE, lpn=1, issue_tick=0)
        timeline_schedule(late, addr, PHASES["write"], timeline)
        record = timeline_schedule(early, addr, PHASES["write"], timeline)

        assert record.start_tick == 0


class TestBruteForceEquivalence:
    OPS = ("read", "write", "erase")
    PLACES = tuple(itertools.product(range(2), range(2)))

    def test_all_pairs(self):
        for first, second in itertools.product(itertools.product(self.OPS, self.PLACES, (0, 2)), repeat=2):
            schedule_both([(op, *place, issue) for op, place, issue in (first, second)])

    def test_all_triples(self):
        choices = tuple(itertools.product(self.OPS, self.PLACES, (0, 2)))
        for triple in itertools.product(choices, repeat=3):
            schedule_both([(op, *place, issue) for op, place, issue in triple])

    def test_all_quadruples_issued_together(self):
        choices = tuple(itertools.product(self.OPS, self.PLACES))
        for quadruple in itertools.product(choices, repeat=4):
            schedule_both([(op, *place, 0) for op, place in quadruple])

    @settings(max_examples=300, deadline=None)
    @given(st.lists(
        st.tuples(st.sampled_from(OPS), st.integers(0, 1), st.integers(0, 1), st.integers(0, 12)),
        min_size=1,
        max_size=4,
    ))
    def test_random_quadruples(self, transactions):
        schedule_both(transactions)
