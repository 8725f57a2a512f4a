from abc import ABC, abstractmethod
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, List, Sequence
import asyncio


class ISweepExecutor(ABC):
    """Interface for running independent experiment jobs"""

    @abstractmethod
    def execute(self, job: Callable[[Any], Any], items: Sequence[Any]) -> List[Any]:
        """Run ``job`` on every item and return results in item order"""
        pass


class SerialSweepExecutor(ISweepExecutor):
    """Runs jobs one after the other in the calling thread"""

    def execute(self, job: Callable[[Any], Any], items: Sequence[Any]) -> List[Any]:
        return [job(item) for item in items]


class ParallelSweepExecutor(ISweepExecutor):
    """Runs jobs on a bounded thread pool driven by a private event loop

    Jobs share no state; numpy and scipy release the GIL in their kernels.
    """

    def __init__(self, max_workers: int):
        self._max_workers = max_workers

    def execute(self, job: Callable[[Any], Any], items: Sequence[Any]) -> List[Any]:
        async def process_all(pool: ThreadPoolExecutor) -> List[Any]:
            loop = asyncio.get_running_loop()
            tasks = [loop.run_in_executor(pool, job, item) for item in items]
            return list(await asyncio.gather(*tasks))

        loop = asyncio.new_event_loop()
        try:
            with ThreadPoolExecutor(max_workers=self._max_workers) as pool:
                return loop.run_until_complete(process_all(pool))
        finally:
            loop.close()


class SweepExecutorFactory:
    """Picks an executor from the job count and the thread cap"""

    @staticmethod
    def create(job_count: int, max_workers: int) -> ISweepExecutor:
        if job_count <= 1 or max_workers <= 1:
            return SerialSweepExecutor()
        return ParallelSweepExecutor(min(job_count, max_workers))
