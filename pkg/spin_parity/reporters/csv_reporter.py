"""CSV reporter: the per-outcome table, one row per outcome."""
import pandas as pd

from spin_parity.document import EXACT, ResultDocument
from spin_parity.reporters import BaseReporter

SAMPLED_COLUMNS = ["outcome", "count", "frequency", "ci_low", "ci_high"]
EXACT_COLUMNS = ["outcome", "probability"]


class CsvReporter(BaseReporter):
    """Reporter for generating comma-separated outcome tables.

    table1 documents get the detector table appended after a blank line.
    """

    def render(self, document: ResultDocument) -> str:
        columns = EXACT_COLUMNS if document.mode == EXACT else SAMPLED_COLUMNS
        frame = pd.DataFrame(document.outcome_rows(), columns=columns)
        content = frame.to_csv(index=False, lineterminator="\n", float_format="%.10g")
        table = document.table_rows()
        if table:
            content += "\n" + pd.DataFrame(table).to_csv(index=False, lineterminator="\n")
        return content
