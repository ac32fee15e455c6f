import math
from dataclasses import dataclass, field
from typing import Iterator, Optional

from bitarray import bitarray

from src.core.constants import constants
from src.core.errors import DeviceFullError, InvariantError, OutOfRangeError
from src.models import FirmwarePolicy, Topology, total_logical_pages


@dataclass(slots=True)
class BlockMeta:
    """
    Bookkeeping of one FTL block.

    Page metadata is created when the block is first programmed and dropped again on erase.

    Attributes:
        id (int): Block index.
        erase_count (int): Completed erases.
        write_pointer (int): Next page to program; pages below it have been programmed.
        invalid_count (int): Programmed pages whose data was superseded.
        valid (bitarray): One bit per programmed page, cleared when the page is invalidated.
        lpns (list[int]): LPN stored in each programmed page.
        tokens (list[int]): Data token stored in each programmed page.
        owner (int): Mapping set the block belongs to, None while free.
        erased_at (int): Tick at which the last erase finished.
        programmed_until (int): Finish tick of the latest program into the block.
        read_until (int): Finish tick of the latest read of a page of the block.
    """

    id: int
    erase_count: int = 0
    write_pointer: int = 0
    invalid_count: int = 0
    valid: Optional[bitarray] = None
    lpns: Optional[list[int]] = None
    tokens: Optional[list[int]] = None
    owner: Optional[int] = None
    erased_at: int = 0
    programmed_until: int = 0
    read_until: int = 0

    @property
    def valid_count(self) -> int:
        return self.write_pointer - self.invalid_count

    def valid_pages(self) -> Iterator[int]:
        """Indexes of the valid pages, ascending, collected up front."""
        if self.valid is None:
            return iter(())
        return iter(list(self.valid.search(1)))


@dataclass(slots=True)
class MappingSet:
    """
    Blocks shared by a group of logical blocks.

    Attributes:
        id (int): Set index.
        blocks (list[int]): Owned blocks in allocation order.
        active (int): Block new pages of the set are programmed into.
    """

    id: int
    blocks: list[int] = field(default_factory=list)
    active: Optional[int] = None


class MappingState:
    """
    Set-associative page mapping.

    Logical block `lpn // pages_per_block` belongs to set `lbn // blocks_per_set`. A set may own up to
    `blocks_per_set + log_blocks_per_set` physical blocks, and any page of the set may live in any of
    them. One set covering every logical block is fully associative; single-block sets with one log
    block each behave like block-level mapping with a log block.
    """

    def __init__(self, topology: Topology, policy: FirmwarePolicy):
        self.topology = topology
        self.policy = policy
        self.pages_per_block = topology.pages_per_block
        self.n_block = topology.n_block
        self.logical_pages = total_logical_pages(topology, policy)
        self.logical_blocks = math.ceil(self.logical_pages / self.pages_per_block)
        self.set_cap = policy.blocks_per_set + policy.log_blocks_per_set

        n_sets = math.ceil(self.logical_blocks / policy.blocks_per_set)
        self.sets = [MappingSet(id=i) for i in range(n_sets)]
        self.blocks = [BlockMeta(id=i) for i in range(self.n_block)]
        self.free_pool: list[int] = list(range(self.n_block))
        self.page_map: dict[int, int] = {}

    def set_of(self, lpn: int) -> int:
        if not 0 <= lpn < self.logical_pages:
            raise OutOfRangeError(f"LPN {lpn} is outside the {self.logical_pages} exported pages")
        return lpn // self.pages_per_block // self.policy.blocks_per_set

    @property
    def free_fraction(self) -> float:
        return len(self.free_pool) / self.n_block

    def needs_gc(self) -> bool:
        """Whether the free pool is below the GC threshold or down to its last block."""
        if len(self.free_pool) < constants.firmware.min_free_blocks:
            return True
        return self.free_fraction < self.policy.gc_threshold

    def lookup(self, lpn: int) -> Optional[int]:
        """Current PPN of an LPN, None if it was never written."""
        return self.page_map.get(lpn)

    def token_at(self, ppn: int) -> int:
        block, page = divmod(ppn, self.pages_per_block)
        return self.blocks[block].tokens[page]

    def has_room(self, set_id: int) -> bool:
        """Whether the set's active block can take another page."""
        active = self.sets[set_id].active
        return active is not None and self.blocks[active].write_pointer < self.pages_per_block

    def at_cap(self, set_id: int) -> bool:
        return len(self.sets[set_id].blocks) >= self.set_cap

    def occupied(self) -> Iterator[BlockMeta]:
        """Blocks that belong to a set."""
        return (meta for meta in self.blocks if meta.owner is not None)

    def open_block(self, set_id: int, block_id: int) -> None:
        """Take a block out of the free pool and make it the set's active block."""
        try:
            self.free_pool.remove(block_id)
        except ValueError:
            raise InvariantError(f"block {block_id} is not free") from None
        meta = self.blocks[block_id]
        meta.owner = set_id
        meta.valid = bitarray()
        meta.lpns = []
        meta.tokens = []
        mapping_set = self.sets[set_id]
        mapping_set.blocks.append(block_id)
        mapping_set.active = block_id

    def program(self, set_id: int, lpn: int, token: int) -> int:
        """Write an LPN into the next page of the set's active block and invalidate its previous copy."""
        if not self.has_room(set_id):
            raise DeviceFullError(f"set {set_id} has no open block with free pages")
        meta = self.blocks[self.sets[set_id].active]
        ppn = meta.id * self.pages_per_block + meta.write_pointer

        old = self.page_map.get(lpn)
        if old is not None:
            self.invalidate(old)

        meta.valid.append(1)
        meta.lpns.append(lpn)
        meta.tokens.append(token)
        meta.write_pointer += 1
        self.page_map[lpn] = ppn
        return ppn

    def invalidate(self, ppn: int) -> None:
        block, page = divmod(ppn, self.pages_per_block)
        meta = self.blocks[block]
        if not meta.valid[page]:
            raise InvariantError(f"PPN {ppn} is already invalid")
        meta.valid[page] = 0
        meta.invalid_count += 1

    def release(self, block_id: int) -> None:
        """Erase a block that holds no valid page and return it to the free pool."""
        meta = self.blocks[block_id]
        if meta.valid_count:
            raise InvariantError(f"block {block_id} still holds {meta.valid_count} valid pages")
        mapping_set = self.sets[meta.owner]
        mapping_set.blocks.remove(block_id)
        if mapping_set.active == block_id:
            mapping_set.active = None

        meta.erase_count += 1
        meta.write_pointer = meta.invalid_count = 0
        meta.valid = meta.lpns = meta.tokens = None
        meta.owner = None
        self.free_pool.append(block_id)

    def snapshot(self) -> list[tuple[int, int, int]]:
        """(block_id, erase_count, invalid_count) of every block."""
        return [(meta.id, meta.erase_count, meta.invalid_count) for meta in self.blocks]
