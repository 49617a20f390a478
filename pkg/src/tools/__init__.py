"""Tools for preparing benchmark data."""

from tools.generate_planted_table import main as generate_planted_table
from tools.import_nats_csv import main as import_nats_csv
