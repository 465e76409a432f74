# Разметка манифестов действий
