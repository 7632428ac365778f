"""
Causal memory lines
===================

Parse free-form model output into numbered causal abstractions and print
them back in canonical form.
"""

from clin.memory import parse_memory

text = """1. Opening the door to the kitchen should be necessary to reach the fridge.
2. Picking up the banana MAY CONTRIBUTE to placing it in the box
3. this line is chatter and gets dropped"""

snap = parse_memory(text, source_reward=50)
for line in snap.lines():
    print(line)
print("dropped:", snap.dropped)
