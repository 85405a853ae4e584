# This file makes the tests/file_tools directory a Python package
