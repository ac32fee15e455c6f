from prometheus_client import CollectorRegistry, Counter, write_to_textfile

registry = CollectorRegistry()

host_requests = Counter('host_requests', 'Count number of host requests dispatched.', ['op', ], registry=registry)
flash_transactions = Counter('flash_transactions', 'Count number of flash transactions scheduled.', ['op', ],
                             registry=registry)
gc_invocations = Counter('gc_invocations', 'Count number of garbage collection runs.', registry=registry)
block_erases = Counter('block_erases', 'Count number of FTL block erases.', registry=registry)
queue_rejections = Counter('queue_rejections', 'Count number of requests rejected by a full device queue.',
                           registry=registry)


def write_metrics(path: str) -> None:
    """Write every counter in the text exposition format."""
    write_to_textfile(path, registry)
