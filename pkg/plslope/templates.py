from jinja2 import Template

from plslope import logger

DIAGRAM_DOT = """digraph markov_diagram {
  // truncation: {{ truncation }}
{%- for key, value in metadata %}
  // {{ key }}: {{ value }}
{%- endfor %}
  node [shape=box, fontname="monospace"];
{%- for v in vertices %}
  v{{ v.id }} [label="{{ v.label }}"];
{%- endfor %}
{%- for a in arrows %}
  v{{ a.src }} -> v{{ a.dst }} [label="{{ a.letter }}"];
{%- endfor %}
}
"""

TABLE_HEADER = """{% for key, value in metadata %}# {{ key }}: {{ value }}
{% endfor %}"""

_compiled = {}

def render_template(text, **kwargs):
    template = _compiled.get(text)
    if template is None:
        template = Template(text)
        _compiled[text] = template
    logger().debug("rendering template with %s", sorted(kwargs))
    return template.render(**kwargs)
