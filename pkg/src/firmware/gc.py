import logging
from typing import Callable, Iterator, Optional

from src.core.errors import EmptyPoolError, InvariantError, NoVictimError
from src.firmware.mapping import BlockMeta, MappingState
from src.models import SubOp, SubRequest

logger = logging.getLogger(__name__)

VictimPolicy = Callable[[MappingState], int]
WearLevelingPolicy = Callable[[list[int], list[BlockMeta]], int]


def wear_leveling_select(free_pool: list[int], block_meta: list[BlockMeta]) -> int:
    """Pick the free block with the fewest erases; ties go to the lowest block index."""
    if not free_pool:
        raise EmptyPoolError("The free block pool is empty.")
    return min(free_pool, key=lambda block: (block_meta[block].erase_count, block))


def greedy_victim(state: MappingState) -> int:
    """The occupied block with the most invalid pages; ties go to the lowest block index."""
    best: Optional[BlockMeta] = None
    for meta in state.occupied():
        if meta.invalid_count and (best is None or meta.invalid_count > best.invalid_count):
            best = meta
    if best is None:
        raise NoVictimError(
            f"GC needed with {len(state.free_pool)} free blocks but no block holds an invalid page, "
            f"over-provisioning is too small"
        )
    return best.id


GC_POLICIES: dict[str, VictimPolicy] = {
    "greedy": greedy_victim,
}

WEAR_LEVELING_POLICIES: dict[str, WearLevelingPolicy] = {
    "min_erase": wear_leveling_select,
}


def allocate_block(state: MappingState, set_id: int, select_block: WearLevelingPolicy = wear_leveling_select) -> int:
    """Open a wear-levelled free block as the set's active block."""
    block = select_block(state.free_pool, state.blocks)
    state.open_block(set_id, block)
    return block


def relocate(
    state: MappingState,
    victim: int,
    ids: Iterator[int],
    select_block: WearLevelingPolicy = wear_leveling_select,
    parent_id: Optional[int] = None,
) -> list[SubRequest]:
    """
    Copy the valid pages of a block to its set's active block, then erase it.

    Returns a GcRead/GcWrite pair per moved page followed by one Erase.
    """
    meta = state.blocks[victim]
    set_id = meta.owner
    if set_id is None:
        raise InvariantError(f"Block {victim} is free and cannot be reclaimed.")
    if state.sets[set_id].active == victim:
        state.sets[set_id].active = None

    subs = []
    base = victim * state.pages_per_block
    for page in meta.valid_pages():
        lpn, token = meta.lpns[page], meta.tokens[page]
        if not state.has_room(set_id):
            allocate_block(state, set_id, select_block)
        new_ppn = state.program(set_id, lpn, token)
        subs.append(SubRequest(id=next(ids), parent_id=parent_id, op=SubOp.GC_READ, lpn=lpn, ppn=base + page,
                               token=token))
        subs.append(SubRequest(id=next(ids), parent_id=parent_id, op=SubOp.GC_WRITE, lpn=lpn, ppn=new_ppn,
                               token=token))

    state.release(victim)
    subs.append(SubRequest(id=next(ids), parent_id=parent_id, op=SubOp.ERASE, lpn=None, ppn=base))
    return subs


def garbage_collection(
    state: MappingState,
    ids: Iterator[int],
    victim_policy: VictimPolicy = greedy_victim,
    select_block: WearLevelingPolicy = wear_leveling_select,
    parent_id: Optional[int] = None,
) -> list[SubRequest]:
    """
    Reclaim victims until the free pool is back at the GC threshold.

    Every pass moves one victim's valid pages within its own set and erases it. Returns the generated
    sub-requests in order, one Erase closing each victim.
    """
    subs = []
    while state.needs_gc():
        victim = victim_policy(state)
        meta = state.blocks[victim]
        logger.debug(
            f"GC victim {victim}: {meta.invalid_count} invalid, {meta.valid_count} valid, "
            f"{len(state.free_pool)} free blocks"
        )
        subs.extend(relocate(state, victim, ids, select_block, parent_id))
    return subs


def merge_set(
    state: MappingState,
    set_id: int,
    ids: Iterator[int],
    select_block: WearLevelingPolicy = wear_leveling_select,
    parent_id: Optional[int] = None,
) -> list[SubRequest]:
    """Compact the most-invalid block of a set that reached its block limit."""
    victim: Optional[BlockMeta] = None
    for block in sorted(state.sets[set_id].blocks):
        meta = state.blocks[block]
        if victim is None or meta.invalid_count > victim.invalid_count:
            victim = meta
    if victim is None or not victim.invalid_count:
        raise NoVictimError(f"Set {set_id} is full but none of its blocks holds an invalid page.")

    logger.debug(f"Merging block {victim.id} of set {set_id}: {victim.valid_count} valid pages")
    return relocate(state, victim.id, ids, select_block, parent_id)
