from celery import shared_task

from lab.reports import emit, report_data


@shared_task
def run_suite_task(name, config=None):
    """
    Асинхронный прогон набора проверок.
    Пишет отчёт в каталог конфигурации и возвращает сводку (JSON-совместимый словарь).
    """
    from lab.suites import build_config, run_suite

    config = build_config(name, config or {})
    report = run_suite(name, config)
    emit(report, config.out, config.formats)
    return report_data(report)
