import csv
import threading
import numpy as np
import tabulate


class Reporter:
    """処理結果をターミナルにわかりやすく出力するためのモジュール．"""

    @staticmethod
    def solution_table(record: dict) -> str:
        """one row of diagnostics and observables of a solve record

        >>> table = Reporter.solution_table({'status': 'feasible', 'fidelity': 1.0})
        >>> table.splitlines()[0].split()
        ['status', 'fidelity']
        """
        return tabulate.tabulate([list(record.values())], list(record.keys()))

    @staticmethod
    def sweep_table(header, rows) -> str:
        shown = [c for c in header if c in (header[0], 'ansatz_size', 'status',
                                            'subspace_residual', 'true_residual',
                                            'fidelity', 'X_avg', 'Z_avg', 'ZZ_avg')]
        table = [[row.get(c, '') for c in shown] for row in rows]
        return tabulate.tabulate(table, shown, floatfmt='.4g')

    @staticmethod
    def sector_table(sectors) -> str:
        table = [[s.index, s.label, s.weight, 'missing' if s.missing else 'found',
                  s.residual, s.psd_violation] for s in sectors]
        return tabulate.tabulate(
            table, ['sector', 'label', 'weight', 'state', 'true_residual', 'psd_violation'],
            floatfmt='.4g', missingval='-')

    @staticmethod
    def matrix_view(m, precision: int = 3) -> str:
        """real and imaginary parts side by side in a grid"""
        m = np.asarray(m)
        table = [[f'{v.real:.{precision}f}{v.imag:+.{precision}f}j' for v in row]
                 for row in m]
        return tabulate.tabulate(table, range(m.shape[1]), tablefmt='simple_grid',
                                 showindex='always', stralign='center')

    @staticmethod
    def violations_table(violations) -> str:
        if not violations:
            return 'no violations'
        return tabulate.tabulate([list(v) for v in violations], ['kind', 'detail'])


class CsvSink:
    """single writer for report rows; rows are written in the order given"""

    def __init__(self, path, header):
        self.path = path
        self.header = list(header)
        self._lock = threading.Lock()
        self._file = None
        self._writer = None

    def __enter__(self):
        self._file = open(self.path, 'w', newline='', encoding='utf-8')
        self._writer = csv.writer(self._file)
        self._writer.writerow(self.header)
        return self

    def __exit__(self, *exc):
        self._file.close()
        return False

    def write(self, row: dict):
        with self._lock:
            self._writer.writerow([_cell(row.get(c)) for c in self.header])


def _cell(value):
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return value
