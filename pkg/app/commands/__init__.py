from app.commands import detect, extract, inspect, learn

# Orden de aparición en --help
COMMANDS = (learn, detect, extract, inspect)
