# Заземление действий и компиляция ДНФ
