# Симулятор Gridworld: домен, рендерер, наборы данных
