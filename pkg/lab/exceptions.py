"""
Исключения лаборатории.

Все ошибки предметной области наследуются от KmlabError и несут
проблемное значение в атрибутах, чтобы наборы проверок могли записать его
в отчёт.
"""


class KmlabError(Exception):
    """Базовая ошибка kmlab."""


class SingularMinor(KmlabError):
    """
    Ведущий минор порядка j (нумерация с 1) численно равен нулю:
    элемент лежит вне верхней страты Брюа.
    """

    def __init__(self, j, value=0.0):
        self.j = j
        self.value = value
        super().__init__(f'leading minor {j} vanishes (|minor|={abs(value):.3e})')


class SingularBlock(KmlabError):
    """Блок, который нужно обратить, вырожден."""


class RankDeficient(KmlabError):
    """QR-разложение встретило нулевой столбец."""

    def __init__(self, j):
        self.j = j
        super().__init__(f'rank deficient at column {j}')


class PoleHit(KmlabError):
    """Знаменатель произведения c-функции обратился в ноль."""

    def __init__(self, factor):
        self.factor = factor
        super().__init__(f'pole hit at factor {factor}')


class OffStratum(KmlabError):
    """Образец не лежит в верхней страте (для диагональных законов)."""

    def __init__(self, j=None):
        self.j = j
        super().__init__(f'sample off the top stratum (minor {j})')


class Unreliable(KmlabError):
    """Оценка Монте-Карло ненадёжна: слишком много отбраковки или мал ESS."""

    def __init__(self, message, fraction=None):
        self.fraction = fraction
        super().__init__(message)


class BlowUp(KmlabError):
    """Решение уравнений Тоды ушло на бесконечность."""

    def __init__(self, t, last_reliable=None, tau=None, crossings=()):
        self.t = t
        self.last_reliable = last_reliable
        self.tau = tau
        self.crossings = list(crossings)
        super().__init__(f'blow-up near t={t} (last reliable t={last_reliable})')


class StratumExit(KmlabError):
    """exp(t x0) покинула верхнюю страту: факторизация не существует."""

    def __init__(self, t):
        self.t = t
        super().__init__(f'exp(t x0) leaves the top stratum at t={t}')


class ClampViolation(KmlabError):
    """Собственное значение C*C больше 1: петля не унитарна."""

    def __init__(self, eigenvalue):
        self.eigenvalue = eigenvalue
        super().__init__(f'eigenvalue of C*C exceeds 1: {eigenvalue:.3e}')


class DivergenceAlarm(KmlabError):
    """Частичные суммы ряда вычетов не проходят проверку хвоста."""


class TailDivergence(KmlabError):
    """Целевая характеристическая функция не убывает интегрируемо."""


class Transversality(KmlabError):
    """После действия g график не трансверсален: блок a+bZ вырожден."""


class UnknownSuite(KmlabError):
    """Набор проверок с таким именем не зарегистрирован."""

    def __init__(self, name):
        self.name = name
        super().__init__(f'unknown suite: {name}')


class ConfigError(KmlabError):
    """Ошибка конфигурации прогона."""

    def __init__(self, errors):
        self.errors = errors
        super().__init__(f'invalid configuration: {errors}')
