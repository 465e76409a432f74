# Планировщик и замкнутый цикл
