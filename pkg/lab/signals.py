import logging

import sentry_sdk
from django.dispatch import receiver, Signal

logger = logging.getLogger(__name__)

# Пользовательские сигналы
suite_finished = Signal()
check_recorded = Signal()


@receiver(check_recorded)
def check_recorded_signal(sender, suite, record, **kwargs):
    """
    Обработчик сигнала check_recorded.
    Пишет в лог каждую проверку; проваленные проверки - с уровнем WARNING.
    """
    if record.verdict == 'fail':
        logger.warning('%s/%s failed: score=%s %s', suite, record.name, record.score, record.note)
    else:
        logger.debug('%s/%s: %s', suite, record.name, record.verdict)


@receiver(suite_finished)
def suite_finished_signal(sender, report, **kwargs):
    """
    Обработчик сигнала suite_finished.
    Логирует счётчики вердиктов и сообщает о проваленных проверках в Sentry
    (без DSN capture_message ничего не отправляет).
    """
    counts = report.counts
    logger.info('suite %s finished in %.2fs: %s', report.suite, report.wall_time, counts)
    if counts['fail']:
        failed = [check.name for check in report.failed]
        sentry_sdk.capture_message(
            f'kmlab suite {report.suite} (seed {report.seed}): {counts["fail"]} failed checks: {failed}',
            level='warning',
        )
