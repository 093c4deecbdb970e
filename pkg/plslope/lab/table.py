import io
import csv
import math

from fractions import Fraction

from plslope import logger
from plslope.templates import render_template, TABLE_HEADER

FLOAT_FORMAT = "%.12g"

def format_cell(value):
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return FLOAT_FORMAT % value
    return str(value)

def parse_cell(text):
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    try:
        return int(text)
    except ValueError:
        pass
    if "/" in text:
        try:
            return Fraction(text)
        except ValueError:
            return text
    try:
        return float(text)
    except ValueError:
        return text


class ExperimentTable():
    """Named columns, ordered rows and (key, value) metadata emitted as leading comment lines."""

    def __init__(self, name, columns, metadata=None):
        self.name = name
        self.columns = list(columns)
        self.rows = []
        self.metadata = list(metadata or [])

    def add_row(self, **values):
        unknown = set(values) - set(self.columns)
        if unknown:
            raise KeyError("unknown columns {}".format(sorted(unknown)))
        self.rows.append({c: values.get(c) for c in self.columns})

    def add_metadata(self, key, value):
        self.metadata.append((key, value))

    def meta(self, key, default=None):
        for k, v in self.metadata:
            if k == key:
                return v
        return default

    def column(self, name):
        return [row[name] for row in self.rows]

    def __len__(self):
        return len(self.rows)

    def to_csv(self):
        out = io.StringIO()
        out.write(render_template(TABLE_HEADER, metadata=self.metadata))
        writer = csv.DictWriter(out, fieldnames=self.columns, lineterminator="\n")
        writer.writeheader()
        for row in self.rows:
            writer.writerow({c: format_cell(row[c]) for c in self.columns})
        return out.getvalue()

    def write(self, path):
        with open(path, "w", newline="") as tf:
            tf.write(self.to_csv())
        logger().info("table %s written to %s (%d rows)", self.name, path, len(self.rows))

    def as_dict(self):
        return {"name": self.name, "metadata": [[k, str(v)] for k, v in self.metadata],
                "columns": self.columns, "rows": [{c: format_cell(r[c]) for c in self.columns} for r in self.rows]}


def read_csv(text, name=None):
    metadata = []
    lines = text.splitlines()
    body = []
    for line in lines:
        if line.startswith("# ") and not body:
            key, _, value = line[2:].partition(": ")
            metadata.append((key, value))
        else:
            body.append(line)
    reader = csv.DictReader(body)
    table = ExperimentTable(name, reader.fieldnames or [], metadata)
    for record in reader:
        table.rows.append({c: parse_cell(record[c]) for c in table.columns})
    return table

def read_table(path):
    with open(path, "r", newline="") as tf:
        return read_csv(tf.read(), name=path)
