from pydantic import BaseModel


class Units(BaseModel):
    """Fixed unit sizes."""

    sector = 512  # In bytes
    ns_per_us = 1_000
    bytes_per_mb = 1_000_000


class Topology(BaseModel):
    """Default SSD topology (8 channels x 8 packages x 4 dies x 2 planes)."""

    channels = 8
    packages = 8
    dies = 4
    planes = 2
    blocks = 1024
    pages = 256
    page_size = 8192  # In bytes
    dma_mhz = 400
    dma_width = 1  # In bytes per transfer
    order = "CWDP"
    ppn_bits = 32


class FlashLatency(BaseModel):
    """Per page type latencies of one flash technology, in nanoseconds."""

    n_meta: int
    t_read: tuple[int, ...]
    t_prog: tuple[int, ...]
    t_erase: int


class Timing(BaseModel):
    """Default flash timings.

    TLC read/program latencies start from 45 us / 250 us LSB base values. MSB is 1.84x (read) and
    8x (program) the LSB value; CSB is MSB / 1.37 (read) and MSB / 1.3 (program).
    """

    t_cmd = 250
    meta_lsb_pages = 5
    slc = FlashLatency(n_meta=0, t_read=(25_000,), t_prog=(200_000,), t_erase=1_500_000)
    mlc = FlashLatency(n_meta=5, t_read=(40_000, 65_000), t_prog=(250_000, 1_300_000), t_erase=3_000_000)
    tlc = FlashLatency(
        n_meta=8,
        t_read=(45_000, 60_438, 82_800),
        t_prog=(250_000, 1_538_462, 2_000_000),
        t_erase=3_500_000,
    )

    def preset(self, n_state: int) -> FlashLatency:
        """Return the latency table for a number of states per cell."""
        return {1: self.slc, 2: self.mlc, 3: self.tlc}[n_state]


class Firmware(BaseModel):
    """Default firmware policy."""

    op_ratio = 0.2
    gc_threshold = 0.05
    log_blocks_per_set = 8
    blocks_per_set = 1
    queue_depth = 32
    gc_policy = "greedy"
    wear_leveling = "min_erase"
    scheduler = "fcfs"
    unmapped_read = "error"
    min_free_blocks = 2  # One block is always held back for GC relocation


class Workload(BaseModel):
    """Default request size sweep (8 KB to 32 MB, doubling)."""

    pattern = "sequential"
    op = "write"
    request_sizes = [8192 << shift for shift in range(13)]
    total_bytes = 32 * 2 ** 20
    span_bytes = 2 ** 30
    queue_depth = 32
    seed = 0
    precondition = True


class Telemetry(BaseModel):
    """Statistics defaults."""

    reservoir_size = 1_000_000
    float_format = "{:.3f}"


class Constants(BaseModel):
    """The app constants."""

    units: Units = Units()
    topology: Topology = Topology()
    timing: Timing = Timing()
    firmware: Firmware = Firmware()
    workload: Workload = Workload()
    telemetry: Telemetry = Telemetry()


constants = Constants()
