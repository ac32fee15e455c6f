import random

import pytest
from hypothesis import given, settings, strategies as st

from src.core.errors import UnmappedReadError
from src.firmware.ftl import FlashTranslationLayer, split_request
from src.firmware.gc import greedy_victim
from src.firmware.pal import ParallelismLayer
from src.models import HostRequest, IoOp, SubOp, SubRequest
from tests.helpers import make_config


def request(op: IoOp, lba: int, n_sector: int, id_: int = 0, tick: int = 0) -> HostRequest:
    return HostRequest(id=id_, op=op, lba=lba, n_sector=n_sector, arrival_tick=tick)


def build_ftl(config) -> FlashTranslationLayer:
    return FlashTranslationLayer(config.topology, config.firmware, ParallelismLayer(config.topology, config.timing))


class TestSplitRequest:
    def test_single_page(self):
        subs = split_request(request(IoOp.READ, 0, 16), 8192)
        assert [(sub.op, sub.lpn) for sub in subs] == [(SubOp.READ, 0)]

    def test_two_pages(self):
        subs = split_request(request(IoOp.WRITE, 0, 32), 8192)
        assert [(sub.op, sub.lpn) for sub in subs] == [(SubOp.WRITE, 0), (SubOp.WRITE, 1)]

    def test_unaligned_read(self):
        subs = split_request(request(IoOp.READ, 8, 16), 8192)
        assert [sub.lpn for sub in subs] == [0, 1]

    def test_unaligned_write_reads_partial_pages_first(self):
        subs = split_request(request(IoOp.WRITE, 8, 16, id_=3), 8192)
        assert [(sub.op, sub.lpn) for sub in subs] == [
            (SubOp.READ, 0), (SubOp.WRITE, 0), (SubOp.READ, 1), (SubOp.WRITE, 1),
        ]
        assert all(sub.parent_id == 3 for sub in subs)
        assert all(sub.token == sub.id for sub in subs if sub.op is SubOp.WRITE)

    def test_ids_are_unique(self):
        subs = split_request(request(IoOp.WRITE, 4, 100), 8192)
        assert len({sub.id for sub in subs}) == len(subs)


class TestFtlMapping:
    def test_write_then_read_same_ppn(self, ftl):
        write = SubRequest(id=0, parent_id=None, op=SubOp.WRITE, lpn=0, token=0)
        read = SubRequest(id=1, parent_id=None, op=SubOp.READ, lpn=0)
        assert ftl.ftl_mapping(write) == ftl.ftl_mapping(read)
        assert read.token == 0

    def test_rewrite_moves_the_page(self, ftl):
        first = ftl.ftl_mapping(SubRequest(id=0, parent_id=None, op=SubOp.WRITE, lpn=0, token=0))
        second = ftl.ftl_mapping(SubRequest(id=1, parent_id=None, op=SubOp.WRITE, lpn=0, token=1))
        assert first != second
        assert ftl.state.blocks[first // 16].invalid_count == 1

    def test_unmapped_read(self, ftl):
        with pytest.raises(UnmappedReadError) as ctx:
            ftl.ftl_mapping(SubRequest(id=0, parent_id=None, op=SubOp.READ, lpn=5))
        assert ctx.value.lpn == 5

    def test_unmapped_read_skipped(self):
        ftl = build_ftl(make_config(firmware={"unmapped_read": "skip"}))
        outcome = ftl.handle(request(IoOp.READ, 0, 16, tick=100), 100)

        assert outcome.sub_requests == []
        assert outcome.finish_tick == 100


class TestHandle:
    def test_full_page_write_issues_no_read(self, ftl, sectors_per_page):
        outcome = ftl.handle(request(IoOp.WRITE, 0, sectors_per_page), 0)
        assert [sub.op for sub in outcome.sub_requests] == [SubOp.WRITE]
        assert outcome.finish_tick == outcome.transactions[-1].finish_tick

    def test_partial_write_of_unmapped_page_skips_the_read(self, ftl):
        outcome = ftl.handle(request(IoOp.WRITE, 1, 4), 0)
        assert [sub.op for sub in outcome.sub_requests] == [SubOp.WRITE]

    def test_read_modify_write(self, ftl, sectors_per_page):
        ftl.handle(request(IoOp.WRITE, 0, sectors_per_page), 0)
        outcome = ftl.handle(request(IoOp.WRITE, 1, 4, id_=1, tick=10_000_000), 10_000_000)
        read, write = outcome.sub_requests

        assert (read.op, write.op) == (SubOp.READ, SubOp.WRITE)
        assert write.issue_tick >= read.finish_tick
        assert outcome.finish_tick == write.finish_tick

    def test_multi_page_finish_is_the_latest_sub_request(self, ftl, sectors_per_page):
        outcome = ftl.handle(request(IoOp.WRITE, 0, 4 * sectors_per_page), 0)
        assert len(outcome.sub_requests) == 4
        assert outcome.finish_tick == max(sub.finish_tick for sub in outcome.sub_requests)

    def test_precondition_resets_counters(self, ftl):
        ftl.precondition(range(100))
        assert ftl.counters.host_pages_written == 0
        assert ftl.read_token(99) is not None
        assert ftl.read_token(100) is None

    def test_merge_when_set_reaches_its_cap(self, sectors_per_page):
        ftl = build_ftl(make_config(firmware={"log_blocks_per_set": 1}))
        for i in range(33):
            ftl.handle(request(IoOp.WRITE, 0, sectors_per_page, id_=i), 0)

        assert ftl.counters.merges == 1
        assert ftl.counters.erases == 1
        assert ftl.counters.gc_pages_moved == 0


def replay(ftl: FlashTranslationLayer, steps, check_victims: bool = False) -> dict[int, int]:
    """Apply (is_write, lpn) steps and compare every read with a shadow map of the last written tokens."""
    spp = ftl.topology.sectors_per_page
    shadow: dict[int, int] = {}
    tick = 0
    for i, (is_write, lpn) in enumerate(steps):
        if is_write:
            outcome = ftl.handle(request(IoOp.WRITE, lpn * spp, spp, id_=i, tick=tick), tick)
            shadow[lpn] = outcome.sub_requests[-1].token
        elif lpn in shadow:
            outcome = ftl.handle(request(IoOp.READ, lpn * spp, spp, id_=i, tick=tick), tick)
            assert outcome.sub_requests[0].token == shadow[lpn]
        else:
            assert ftl.read_token(lpn) is None
            continue
        tick = outcome.finish_tick
        ftl.pal.advance(tick)
        assert ftl.state.free_pool

    for lpn, token in shadow.items():
        assert ftl.read_token(lpn) == token
    return shadow


class TestDataIntegrity:
    @pytest.mark.parametrize("blocks_per_set, log_blocks_per_set", [(1, 1), (1, 8), (2, 2), (6, 8)])
    @settings(max_examples=50, deadline=None)
    @given(steps=st.lists(st.tuples(st.booleans(), st.integers(0, 23)), max_size=300))
    def test_shadow_map_agrees(self, blocks_per_set, log_blocks_per_set, steps):
        config = make_config(
            topology={"blocks": 8, "pages": 4},
            firmware={
                "op_ratio": 0.25,
                "gc_threshold": 0.1,
                "blocks_per_set": blocks_per_set,
                "log_blocks_per_set": log_blocks_per_set,
            },
        )
        replay(build_ftl(config), steps)

    def test_random_writes_with_gc(self):
        """10^5 random single-page writes with interleaved reads; every GC victim is a greedy maximum."""
        config = make_config(firmware={"blocks_per_set": 64})
        ftl = build_ftl(config)
        victims = []

        def checked_greedy(state):
            victim = greedy_victim(state)
            best = max(meta.invalid_count for meta in state.occupied())
            victims.append((state.blocks[victim].invalid_count, best))
            return victim

        ftl.victim_policy = checked_greedy
        rng = random.Random(2016)
        logical_pages = ftl.state.logical_pages
        steps = []
        for i in range(100_000):
            steps.append((True, rng.randrange(logical_pages)))
            if i % 10 == 0:
                steps.append((False, rng.randrange(logical_pages)))
        replay(ftl, steps)

        counters = ftl.counters
        assert counters.gc_invocations >= 100
        assert (counters.host_pages_written + counters.gc_pages_moved) / counters.host_pages_written > 1
        assert len(victims) >= 100
        assert all(chosen == best for chosen, best in victims)

        erase_counts = [erase_count for _, erase_count, _ in ftl.state.snapshot()]
        mean = sum(erase_counts) / len(erase_counts)
        assert max(erase_counts) - min(erase_counts) <= 0.5 * mean


class TestFlashOrdering:
    MULTI_DIE = {"channels": 2, "packages": 1, "dies": 2, "planes": 1, "blocks": 32, "pages": 16}

    def test_read_waits_for_the_program_of_its_data(self, ftl, sectors_per_page):
        write = ftl.handle(request(IoOp.WRITE, 0, sectors_per_page, id_=0, tick=1_000_000), 1_000_000)
        read = ftl.handle(request(IoOp.READ, 0, sectors_per_page, id_=1), 0)

        assert read.sub_requests[0].token == write.sub_requests[0].token
        assert min(txn.start_tick for txn in read.transactions) >= write.finish_tick

    def test_reads_follow_programs_and_erases_follow_reads(self):
        """Random single-page traffic issued ahead of completions never reads unprogrammed or erased pages."""
        ftl = build_ftl(make_config(topology=self.MULTI_DIE))
        pages_per_block = ftl.topology.pages_per_block
        spp = ftl.topology.sectors_per_page
        logical_pages = ftl.state.logical_pages
        ftl.precondition(range(logical_pages))

        rng = random.Random(7)
        program_ends: dict[int, int] = {}
        read_ends: dict[int, int] = {}
        tick = 0
        for i in range(3000):
            tick += rng.randrange(0, 50_000)
            ftl.pal.advance(tick)
            op = IoOp.READ if rng.random() < 0.5 else IoOp.WRITE
            outcome = ftl.handle(request(op, rng.randrange(logical_pages) * spp, spp, id_=i, tick=tick), tick)
            starts = {txn.sub_request_id: txn.start_tick for txn in outcome.transactions}

            for sub in outcome.background + outcome.sub_requests:
                block = sub.ppn // pages_per_block
                if sub.op.is_read:
                    assert starts[sub.id] >= program_ends.get(sub.ppn, 0)
                    read_ends[block] = max(read_ends.get(block, 0), sub.finish_tick)
                elif sub.op is SubOp.ERASE:
                    assert starts[sub.id] >= read_ends.get(block, 0)
                    for ppn in range(block * pages_per_block, (block + 1) * pages_per_block):
                        program_ends.pop(ppn, None)
                else:
                    program_ends[sub.ppn] = sub.finish_tick

        assert ftl.counters.erases > 0
