# Experiment plugins – auto-discovered by main.py
