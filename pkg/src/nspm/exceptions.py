"""Exception hierarchy.

Every error carries a module-qualified ``code`` so the command line can
report failures as a single machine-parseable line.
"""


class NSPMError(Exception):
    """Base class for all domain errors."""

    module = "nspm"

    @property
    def code(self):
        return f"{self.module}.{type(self).__name__}"


# kb_catalog -----------------------------------------------------------------

class CatalogError(NSPMError):
    module = "kb_catalog"


class MalformedLine(CatalogError, ValueError):
    def __init__(self, line_no, line=""):
        self.line_no = line_no
        self.line = line
        super().__init__(f"malformed N-Triples statement at line {line_no}")


class EmptyCatalog(CatalogError, ValueError):
    pass


class UnknownEntity(CatalogError, KeyError):
    def __init__(self, uri):
        self.uri = uri
        super().__init__(f"unknown entity {uri}")

    def __str__(self):
        return self.args[0]


class BadRank(CatalogError, ValueError):
    pass


# sparql_codec -----------------------------------------------------------------

class CodecError(NSPMError):
    module = "sparql_codec"


class SparqlSyntaxError(CodecError, ValueError):
    def __init__(self, position, expected, found=None):
        self.position = position
        self.expected = expected
        self.found = found
        msg = f"at {position}: expected {expected}"
        if found is not None:
            msg += f", found {found!r}"
        super().__init__(msg)


class DecodeError(CodecError, ValueError):
    def __init__(self, position, token, reason=""):
        self.position = position
        self.token = token
        msg = f"cannot decode token {token!r} at position {position}"
        if reason:
            msg += f" ({reason})"
        super().__init__(msg)


class UnsupportedConstruct(CodecError, ValueError):
    pass


class EmptyQuestion(CodecError, ValueError):
    pass


class UnknownPreset(CodecError, ValueError):
    pass


# template_engine ------------------------------------------------------------

class TemplateError(NSPMError):
    module = "template_engine"


class PlaceholderMismatch(TemplateError, ValueError):
    def __init__(self, template_id, detail=""):
        self.template_id = template_id
        super().__init__(f"template {template_id}: placeholder mismatch {detail}".rstrip())


class BadPattern(TemplateError, ValueError):
    def __init__(self, template_id, detail=""):
        self.template_id = template_id
        super().__init__(f"template {template_id}: bad pattern {detail}".rstrip())


class NoEligibleEntities(TemplateError, ValueError):
    def __init__(self, template_id, class_iri):
        self.template_id = template_id
        self.class_iri = class_iri
        super().__init__(f"template {template_id}: no entity of class {class_iri}")


class TooSmall(TemplateError, ValueError):
    pass


# learner --------------------------------------------------------------------

class LearnerError(NSPMError):
    module = "learner"


class NumericOverflow(LearnerError, FloatingPointError):
    pass


class CorruptCheckpoint(LearnerError, ValueError):
    pass


# interpreter ----------------------------------------------------------------

class Unrepairable(NSPMError, ValueError):
    module = "interpreter"


# evaluator ------------------------------------------------------------------

class LengthMismatch(NSPMError, ValueError):
    module = "evaluator"
