"""
Разбиение Монте-Карло на порции (чанки) и их выполнение в пуле потоков.

Порция c получает собственный генератор key.generator(c), поэтому результат
зависит только от (seed, поток, размер порции), а не от числа потоков:
результаты собираются строго в порядке номеров порций.
"""
import logging
from concurrent.futures import ThreadPoolExecutor

from django.conf import settings

logger = logging.getLogger(__name__)


def chunk_sizes(total, chunk_size):
    """Размеры порций: полные порции chunk_size и остаток."""
    full, rest = divmod(int(total), int(chunk_size))
    return [chunk_size] * full + ([rest] if rest else [])


def map_chunks(func, total, chunk_size=None, threads=None):
    """
    Вызывает func(index, size) для каждой порции и возвращает список
    результатов в порядке index.
    """
    chunk_size = chunk_size or settings.KMLAB['CHUNK_SIZE']
    threads = threads or settings.KMLAB['THREADS']
    sizes = chunk_sizes(total, chunk_size)
    logger.debug('map_chunks: %d draws in %d chunks on %d threads', total, len(sizes), threads)
    if threads <= 1 or len(sizes) <= 1:
        return [func(index, size) for index, size in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(func, index, size) for index, size in enumerate(sizes)]
        return [future.result() for future in futures]
