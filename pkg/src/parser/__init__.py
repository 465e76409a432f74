# Парсер PDDL
