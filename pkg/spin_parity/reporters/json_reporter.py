"""JSON reporter for machine-readable output."""
import json

from spin_parity.document import ResultDocument
from spin_parity.reporters import BaseReporter


class JsonReporter(BaseReporter):
    """Reporter for generating JSON output."""

    def render(self, document: ResultDocument) -> str:
        return json.dumps(document.to_dict(), indent=2, ensure_ascii=False) + "\n"
