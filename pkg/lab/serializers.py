from rest_framework import serializers

FORMATS = ('json', 'csv')
VERDICTS = ('pass', 'fail', 'pole', 'exploratory')


class SuiteConfigSerializer(serializers.Serializer):
    """
    Сериализатор файла конфигурации прогона (плоское YAML-отображение).
    Все поля необязательны: пропущенные берутся из settings.KMLAB.
    Неизвестные ключи верхнего уровня отклоняются.
    """
    seed = serializers.IntegerField(required=False, min_value=0)
    threads = serializers.IntegerField(required=False, min_value=1)
    out = serializers.CharField(required=False)
    formats = serializers.ListField(child=serializers.ChoiceField(choices=FORMATS), required=False,
                                    allow_empty=False)
    chunk_size = serializers.IntegerField(required=False, min_value=1)
    params = serializers.DictField(required=False)

    def validate(self, attrs):
        """
        Проверяет отсутствие лишних ключей в исходных данных.
        """
        unknown = sorted(set(self.initial_data) - set(self.fields))
        if unknown:
            raise serializers.ValidationError({key: 'Unknown configuration key.' for key in unknown})
        return attrs


class CheckRecordSerializer(serializers.Serializer):
    """
    Сериализатор одной проверки набора: оценка и эталон разложены на
    вещественную и мнимую части, нечисловые значения выдаются как null.
    """
    check = serializers.CharField(source='name')
    params = serializers.DictField()
    estimate_re = serializers.FloatField(allow_null=True)
    estimate_im = serializers.FloatField(allow_null=True)
    reference_re = serializers.FloatField(allow_null=True)
    reference_im = serializers.FloatField(allow_null=True)
    stderr = serializers.FloatField(allow_null=True, source='stderr_finite')
    score = serializers.FloatField(allow_null=True, source='score_finite')
    verdict = serializers.ChoiceField(choices=VERDICTS)
    note = serializers.CharField(allow_blank=True)


class SuiteReportSerializer(serializers.Serializer):
    """
    Сериализатор сводки прогона: идентификатор набора, зерно, версия,
    счётчики вердиктов, заметки и список проверок.
    """
    suite = serializers.CharField()
    seed = serializers.IntegerField()
    version = serializers.CharField()
    wall_time = serializers.FloatField()
    counts = serializers.DictField(child=serializers.IntegerField())
    notes = serializers.ListField(child=serializers.CharField())
    checks = CheckRecordSerializer(many=True)
