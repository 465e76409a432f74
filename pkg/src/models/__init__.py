# Конфигурации и записи конвейера
