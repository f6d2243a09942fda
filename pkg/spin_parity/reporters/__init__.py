"""Base reporter interface."""
import sys
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Optional

from spin_parity.document import ResultDocument


class BaseReporter(ABC):
    """Base class for all reporters."""

    @abstractmethod
    def render(self, document: ResultDocument) -> str:
        """Render a document.

        Args:
            document: result of one command

        Returns:
            The report text
        """
        pass

    def generate(self, document: ResultDocument, output_path: Optional[Path] = None) -> str:
        """Render and, when ``output_path`` is given, write the report there.

        Returns:
            The report text
        """
        content = self.render(document)
        if output_path is not None:
            output_path = Path(output_path)
            output_path.parent.mkdir(parents=True, exist_ok=True)
            with open(output_path, 'w', encoding='utf-8', newline='\n') as f:
                f.write(content)
            print(f"Report saved to: {output_path}", file=sys.stderr)
        return content


def get_reporter(name: str) -> BaseReporter:
    """Reporter for an output format name (text, csv or json)."""
    from spin_parity.reporters.csv_reporter import CsvReporter
    from spin_parity.reporters.json_reporter import JsonReporter
    from spin_parity.reporters.text_reporter import TextReporter

    reporters = {"text": TextReporter, "csv": CsvReporter, "json": JsonReporter}
    if name not in reporters:
        raise ValueError(f"Unsupported output format: {name}")
    return reporters[name]()
