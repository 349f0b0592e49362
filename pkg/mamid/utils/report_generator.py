import os

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt
import pandas as pd
import seaborn as sns
from reportlab.lib import colors
from reportlab.lib.pagesizes import landscape, letter
from reportlab.lib.styles import getSampleStyleSheet
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

TABLE_STYLE = TableStyle([
    ('BACKGROUND', (0, 0), (-1, 0), colors.grey),
    ('TEXTCOLOR', (0, 0), (-1, 0), colors.whitesmoke),
    ('ALIGN', (0, 0), (-1, -1), 'CENTER'),
    ('FONTNAME', (0, 0), (-1, 0), 'Helvetica-Bold'),
    ('FONTSIZE', (0, 0), (-1, 0), 9),
    ('BOTTOMPADDING', (0, 0), (-1, 0), 8),
    ('BACKGROUND', (0, 1), (-1, -1), colors.beige),
    ('GRID', (0, 0), (-1, -1), 1, colors.black),
    ('FONTSIZE', (0, 1), (-1, -1), 7),
])


def _cell(value):
    if isinstance(value, float):
        return f'{value:.6f}'
    if value is None or (not isinstance(value, str) and pd.isna(value)):
        return '-'
    return str(value)


class ReportGenerator:
    """Utility class for writing run reports in various formats."""

    @staticmethod
    def generate_excel_report(sheets, path):
        """One sheet per table; sheet names are cut to Excel's 31 characters."""
        with pd.ExcelWriter(path, engine='openpyxl') as writer:
            for name, frame in sheets.items():
                sheet = name[:31]
                frame.to_excel(writer, sheet_name=sheet, index=False)

                # Auto-adjust column widths
                worksheet = writer.sheets[sheet]
                for column in worksheet.columns:
                    width = max(len(str(cell.value)) if cell.value is not None else 0 for cell in column)
                    worksheet.column_dimensions[column[0].column_letter].width = width + 2
        return path

    @staticmethod
    def generate_pdf_report(title, sections, path):
        """sections: list of (heading, DataFrame or paragraph text)."""
        doc = SimpleDocTemplate(path, pagesize=landscape(letter))
        styles = getSampleStyleSheet()
        story = [Paragraph(title, styles['Title']), Spacer(1, 12)]

        for heading, body in sections:
            story.append(Paragraph(heading, styles['Heading2']))
            if isinstance(body, pd.DataFrame):
                if body.empty:
                    story.append(Paragraph('No rows.', styles['Normal']))
                else:
                    table_data = [[str(c) for c in body.columns]]
                    table_data += [[_cell(v) for v in row] for row in body.itertuples(index=False, name=None)]
                    table = Table(table_data)
                    table.setStyle(TABLE_STYLE)
                    story.append(table)
            else:
                for line in str(body).splitlines():
                    story.append(Paragraph(line or '&nbsp;', styles['Normal']))
            story.append(Spacer(1, 12))

        doc.build(story)
        return path

    @staticmethod
    def generate_chart(frame, chart_type, title, path, x=None, y=None, hue=None):
        """Scatter or bar chart saved as PNG."""
        plt.figure(figsize=(10, 6))

        if chart_type == 'scatter' and not frame.empty:
            sns.scatterplot(data=frame, x=x, y=y, hue=hue, s=12)
            plt.ylabel('Accuracy')

        elif chart_type == 'bar' and not frame.empty:
            sns.barplot(data=frame, x=x, y=y, hue=hue)
            plt.xticks(rotation=45)
            plt.ylabel('Mean accuracy')

        plt.title(title)
        plt.tight_layout()
        os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
        plt.savefig(path, format='png')
        plt.close()
        return path
