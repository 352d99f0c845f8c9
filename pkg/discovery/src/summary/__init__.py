from .summary import LEGEND, render_cell, render_markdown, render_summary, write_csv
