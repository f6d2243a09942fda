"""Plain-text reporter rendered from a Jinja2 template."""
from typing import Any, Optional

from jinja2 import Environment, StrictUndefined

from spin_parity.document import ResultDocument
from spin_parity.protocols.bell import TABLE1_COLUMNS
from spin_parity.reporters import BaseReporter

TEMPLATE = """\
{{ '=' * 60 }}
spin-parity {{ doc.version }}: {{ doc.scenario.protocol }} ({{ doc.mode }})
{{ '=' * 60 }}
seed: {{ doc.seed }}
scenario:
{% for line in doc.scenario_text.splitlines() %}
  {{ line }}
{% endfor %}

summary:
{% for key, value in summary.items() %}
  {{ key }}: {{ value | num }}
{% endfor %}

{% if doc.mode == 'exact' %}
{{ '%-16s %14s' | format('outcome', 'probability') }}
{% for row in rows %}
{{ '%-16s %14s' | format(row.outcome, row.probability | num) }}
{% endfor %}
{% else %}
{{ '%-16s %8s %12s %12s %12s' | format('outcome', 'count', 'frequency', 'ci_low', 'ci_high') }}
{% for row in rows %}
{{ '%-16s %8d %12s %12s %12s' | format(row.outcome, row.count, row.frequency | num, row.ci_low | num, row.ci_high | num) }}
{% endfor %}
{% endif %}
{% if table %}

detector table (D1 D2):
{{ '%-8s' | format('') }}{% for label in columns %}{{ '%-6s' | format(label.symbol) }}{% endfor %}

{% for row in table %}
{{ '%-8s' | format(row.readout) }}{% for label in columns %}{{ '%-6s' | format(row[label.symbol]) }}{% endfor %}

{% endfor %}
{% endif %}
"""


def _format_number(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool) or isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.6f}"
    if isinstance(value, (list, tuple)):
        return "[" + ", ".join(_format_number(v) for v in value) + "]"
    if isinstance(value, dict):
        return "{" + ", ".join(f"{k}: {_format_number(v)}" for k, v in value.items()) + "}"
    return str(value)


class TextReporter(BaseReporter):
    """Human-readable document with stable key order."""

    def __init__(self, template: Optional[str] = None):
        env = Environment(trim_blocks=True, lstrip_blocks=True, keep_trailing_newline=True,
                          undefined=StrictUndefined)
        env.filters["num"] = _format_number
        self.template = env.from_string(template or TEMPLATE)

    def render(self, document: ResultDocument) -> str:
        return self.template.render(
            doc=document,
            summary=document.summary(),
            rows=document.outcome_rows(),
            table=document.table_rows(),
            columns=TABLE1_COLUMNS,
        )
