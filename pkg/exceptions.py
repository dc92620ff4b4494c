class MalformedInputException(Exception):
    pass


class NotASubspaceException(Exception):
    pass


class NotAFanException(Exception):
    pass


class NotUnimodularException(Exception):
    pass


class NotCodimOneException(Exception):
    pass


class NotSimpleException(Exception):
    pass


class DegreeMismatchException(Exception):
    pass


class RankDeficientException(Exception):
    pass


class DegeneratePairingException(Exception):
    pass


class HLFailureException(Exception):
    pass


class ChaseFailureException(Exception):
    pass


class IncompatibleClassException(Exception):
    pass


class GluingConflictException(Exception):
    pass


class ZigzagInconsistentException(Exception):
    pass


class VerificationFailedException(Exception):
    pass


class NotBergmanException(Exception):
    pass
