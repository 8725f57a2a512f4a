from src.lab.helpers.parallel import ParallelSweepExecutor, SerialSweepExecutor, SweepExecutorFactory


def test_factory_picks_serial_for_one_job_or_one_thread():
    assert isinstance(SweepExecutorFactory.create(1, 8), SerialSweepExecutor)
    assert isinstance(SweepExecutorFactory.create(5, 1), SerialSweepExecutor)
    assert isinstance(SweepExecutorFactory.create(5, 4), ParallelSweepExecutor)


def test_parallel_keeps_item_order():
    items = list(range(12))
    assert ParallelSweepExecutor(4).execute(lambda x: x * x, items) == [x * x for x in items]


def test_serial_runs_every_item():
    assert SerialSweepExecutor().execute(str, [1, 2]) == ["1", "2"]
