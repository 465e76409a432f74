# Классификатор предикатов и его обучение
