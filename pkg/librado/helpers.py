import math


def format_scientific(value, digits=5):
    """Formats a float as mantissa + unpadded exponent, e.g. 1.00501e-3"""
    if math.isnan(value) or math.isinf(value):
        return str(value)
    mantissa, exponent = f'{value:.{digits}e}'.split('e')
    return f'{mantissa}e{int(exponent)}'


def format_percent(value):
    return f'{value:.2f}%'


def parse_bool(text):
    """Parses yes/no style flags found in configuration files"""
    lowered = str(text).strip().lower()
    if lowered in ('1', 'true', 'yes', 'y', 'on'):
        return True
    if lowered in ('0', 'false', 'no', 'n', 'off', ''):
        return False
    raise ValueError(f'not a boolean: {text!r}')


def parse_float_list(text):
    return [float(x) for x in split_list(text)]


def split_list(text):
    return [x.strip() for x in str(text).split(',') if x.strip()]
