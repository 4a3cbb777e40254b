"""
workbook/xlsx.py
Minimal SpreadsheetML package writer. Strings are inline, formulas carry no
cached value and the workbook asks for a full recalculation on load. Zip
entries get a fixed timestamp so the same workbook gives the same bytes.
"""

import html
import io
import logging
import zipfile

from tools.files import atomic_write
from workbook.cells import Workbook, column_letters
from workbook.formula import format_number

logger = logging.getLogger(__name__)

_MAIN = "http://schemas.openxmlformats.org/spreadsheetml/2006/main"
_REL = "http://schemas.openxmlformats.org/officeDocument/2006/relationships"
_PKG_REL = "http://schemas.openxmlformats.org/package/2006/relationships"
_HEAD = '<?xml version="1.0" encoding="UTF-8" standalone="yes"?>\n'

BOLD_ITALIC_STYLE = 1


def _content_types(n_sheets: int) -> str:
    sheets = "".join(
        f'<Override PartName="/xl/worksheets/sheet{i}.xml" '
        f'ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.worksheet+xml"/>'
        for i in range(1, n_sheets + 1)
    )
    return (
        _HEAD
        + '<Types xmlns="http://schemas.openxmlformats.org/package/2006/content-types">'
        + '<Default Extension="rels" ContentType="application/vnd.openxmlformats-package.relationships+xml"/>'
        + '<Default Extension="xml" ContentType="application/xml"/>'
        + '<Override PartName="/xl/workbook.xml" '
          'ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.sheet.main+xml"/>'
        + sheets
        + '<Override PartName="/xl/styles.xml" '
          'ContentType="application/vnd.openxmlformats-officedocument.spreadsheetml.styles+xml"/>'
        + "</Types>"
    )


def _root_rels() -> str:
    return (
        _HEAD
        + f'<Relationships xmlns="{_PKG_REL}">'
        + f'<Relationship Id="rId1" Type="{_REL}/officeDocument" Target="xl/workbook.xml"/>'
        + "</Relationships>"
    )


def _workbook_xml(wb: Workbook) -> str:
    sheets = "".join(
        f'<sheet name="{html.escape(s.name)}" sheetId="{i}" r:id="rId{i}"/>'
        for i, s in enumerate(wb.sheets, 1)
    )
    names = "".join(
        f'<definedName name="{html.escape(n.name)}">{html.escape(n.absolute_reference(), quote=False)}</definedName>'
        for n in sorted(wb.names, key=lambda n: n.name)
    )
    return (
        _HEAD
        + f'<workbook xmlns="{_MAIN}" xmlns:r="{_REL}">'
        + f"<sheets>{sheets}</sheets>"
        + (f"<definedNames>{names}</definedNames>" if names else "")
        + '<calcPr calcId="191029" fullCalcOnLoad="1"/>'
        + "</workbook>"
    )


def _workbook_rels(n_sheets: int) -> str:
    sheets = "".join(
        f'<Relationship Id="rId{i}" Type="{_REL}/worksheet" Target="worksheets/sheet{i}.xml"/>'
        for i in range(1, n_sheets + 1)
    )
    return (
        _HEAD
        + f'<Relationships xmlns="{_PKG_REL}">'
        + sheets
        + f'<Relationship Id="rId{n_sheets + 1}" Type="{_REL}/styles" Target="styles.xml"/>'
        + "</Relationships>"
    )


def _styles_xml() -> str:
    # xf 0 is the default; xf 1 is the definition-row style
    return (
        _HEAD
        + f'<styleSheet xmlns="{_MAIN}">'
        + '<fonts count="2">'
          '<font><sz val="11"/><name val="Calibri"/></font>'
          '<font><b/><i/><sz val="11"/><name val="Calibri"/></font>'
          "</fonts>"
        + '<fills count="2"><fill><patternFill patternType="none"/></fill>'
          '<fill><patternFill patternType="gray125"/></fill></fills>'
        + '<borders count="1"><border><left/><right/><top/><bottom/><diagonal/></border></borders>'
        + '<cellStyleXfs count="1"><xf numFmtId="0" fontId="0" fillId="0" borderId="0"/></cellStyleXfs>'
        + '<cellXfs count="2">'
          '<xf numFmtId="0" fontId="0" fillId="0" borderId="0" xfId="0"/>'
          '<xf numFmtId="0" fontId="1" fillId="0" borderId="0" xfId="0" applyFont="1"/>'
          "</cellXfs>"
        + '<cellStyles count="1"><cellStyle name="Normal" xfId="0" builtinId="0"/></cellStyles>'
        + "</styleSheet>"
    )


def _sheet_xml(sheet) -> str:
    rows = []
    for row, cells in sheet.rows().items():
        out = []
        for col, content in cells.items():
            ref = f"{column_letters(col)}{row}"
            style = f' s="{BOLD_ITALIC_STYLE}"' if content.bold_italic else ""
            if content.is_label:
                text = html.escape(content.label, quote=False)
                out.append(f'<c r="{ref}"{style} t="inlineStr"><is><t xml:space="preserve">{text}</t></is></c>')
            elif content.is_literal:
                out.append(f'<c r="{ref}"{style}><v>{format_number(content.literal)}</v></c>')
            else:
                text = html.escape(content.formula[1:], quote=False)
                out.append(f'<c r="{ref}"{style}><f>{text}</f></c>')
        rows.append(f'<row r="{row}">{"".join(out)}</row>')
    return _HEAD + f'<worksheet xmlns="{_MAIN}"><sheetData>{"".join(rows)}</sheetData></worksheet>'


def xlsx_bytes(wb: Workbook) -> bytes:
    parts = [
        ("[Content_Types].xml", _content_types(len(wb.sheets))),
        ("_rels/.rels", _root_rels()),
        ("xl/workbook.xml", _workbook_xml(wb)),
        ("xl/_rels/workbook.xml.rels", _workbook_rels(len(wb.sheets))),
        ("xl/styles.xml", _styles_xml()),
    ]
    parts += [(f"xl/worksheets/sheet{i}.xml", _sheet_xml(s)) for i, s in enumerate(wb.sheets, 1)]

    buffer = io.BytesIO()
    with zipfile.ZipFile(buffer, "w", zipfile.ZIP_DEFLATED) as zf:
        for name, xml in parts:
            info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
            info.compress_type = zipfile.ZIP_DEFLATED
            zf.writestr(info, xml.encode("utf-8"))
    return buffer.getvalue()


def write_xlsx(wb: Workbook, path):
    data = xlsx_bytes(wb)
    atomic_write(path, data)
    logger.info("exported %d sheet(s) to %s", len(wb.sheets), path)
