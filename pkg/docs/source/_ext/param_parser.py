from sphinx.ext.napoleon.docstring import NumpyDocstring


def _bullets(section):
    """(name, type, description) of `- `name` (type):` bullets with indented descriptions."""
    items = []
    for line in section.splitlines():
        stripped = line.strip()
        if stripped.startswith("- `"):
            head = stripped[2:].rstrip(":")
            name, _, type_ = head.partition("(")
            items.append([name.strip().strip("`"), type_.rstrip(")").strip(), []])
        elif stripped and items:
            items[-1][2].append(stripped)
    return [(name, type_, " ".join(desc)) for name, type_, desc in items]


class CustomNumpyDocstring(NumpyDocstring):
    def _parse_parameters_section(self, section):
        return _bullets(section)

    def _parse_attributes_section(self, section):
        return _bullets(section)


def process_docstring(app, what, name, obj, options, lines):
    docstring = "\n".join(lines)
    custom_doc = CustomNumpyDocstring(docstring)
    lines[:] = str(custom_doc).splitlines()


def setup(app):
    app.connect("autodoc-process-docstring", process_docstring)
    return {"version": "1.1", "parallel_read_safe": True}
