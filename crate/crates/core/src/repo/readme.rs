//! Line-oriented README model: headings, sections, fenced code blocks.
//!
//! Handles ATX (`## Title`), setext (underlined), inline-HTML `<hN>` headings
//! and, for reStructuredText files, underlined/overlined titles and
//! `.. code-block::` directives. Lines inside fences never open sections.

use std::sync::OnceLock;

use regex::Regex;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Heading {
    pub level: u8,
    pub text: String,
    /// Zero-based line index of the heading text.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Section {
    /// Index into [`ReadmeModel::headings`]; `None` for text before the first heading.
    pub heading: Option<usize>,
    pub body: String,
    pub word_count: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeBlock {
    pub info_string: String,
    pub body: String,
    /// Index into [`ReadmeModel::sections`].
    pub section: usize,
    /// Zero-based line index of the opening fence or directive.
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReadmeModel {
    pub path: String,
    pub headings: Vec<Heading>,
    pub sections: Vec<Section>,
    pub fenced_code_blocks: Vec<CodeBlock>,
    pub text: String,
}

fn atx_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^ {0,3}(#{1,6})(?:[ \t]+(.*?))?[ \t]*#*[ \t]*$").unwrap())
}

fn html_heading_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?i)^\s*<h([1-6])[^>]*>(.*?)</h[1-6]>\s*$").unwrap())
}

fn tag_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"<[^>]+>").unwrap())
}

fn rst_adornment(line: &str) -> Option<char> {
    let t = line.trim_end();
    let first = t.chars().next()?;
    if t.len() < 3 || !"=-~^\"'`*+#:._".contains(first) {
        return None;
    }
    t.chars().all(|c| c == first).then_some(first)
}

fn fence_open(line: &str) -> Option<(char, usize, String)> {
    let t = line.trim_start();
    if line.len() - t.len() > 3 {
        return None;
    }
    let ch = t.chars().next()?;
    if ch != '`' && ch != '~' {
        return None;
    }
    let n = t.chars().take_while(|&c| c == ch).count();
    if n < 3 {
        return None;
    }
    let info = t[n..].trim().to_string();
    if ch == '`' && info.contains('`') {
        return None;
    }
    Some((ch, n, info))
}

fn is_fence_close(line: &str, ch: char, n: usize) -> bool {
    let t = line.trim();
    t.len() >= n && t.chars().all(|c| c == ch)
}

pub fn word_count(text: &str) -> usize {
    text.split_whitespace().filter(|w| w.chars().any(char::is_alphanumeric)).count()
}

fn clean_heading(text: &str) -> String {
    let t = tag_re().replace_all(text, "");
    t.trim().trim_matches(|c| c == '*' || c == '_').trim().to_string()
}

struct Builder {
    headings: Vec<Heading>,
    sections: Vec<Section>,
    blocks: Vec<CodeBlock>,
}

impl Builder {
    fn push_line(&mut self, line: &str) {
        let s = self.sections.last_mut().expect("preamble section");
        s.body.push_str(line);
        s.body.push('\n');
    }

    fn open_section(&mut self, level: u8, text: String, line: usize) {
        self.headings.push(Heading { level, text, line });
        self.sections.push(Section { heading: Some(self.headings.len() - 1), body: String::new(), word_count: 0 });
    }
}

impl ReadmeModel {
    pub fn parse(path: &str, text: &str) -> Self {
        let rst = path.to_ascii_lowercase().ends_with(".rst");
        let lines: Vec<&str> = text.lines().collect();
        let mut b = Builder {
            headings: Vec::new(),
            sections: vec![Section { heading: None, body: String::new(), word_count: 0 }],
            blocks: Vec::new(),
        };
        let mut rst_levels: Vec<char> = Vec::new();
        let mut fence: Option<(char, usize, String, String, usize)> = None;
        let mut rst_block: Option<(String, String, usize, usize)> = None;
        let mut i = 0;
        while i < lines.len() {
            let line = lines[i];

            if let Some((ch, n, info, mut body, start)) = fence.take() {
                b.push_line(line);
                if is_fence_close(line, ch, n) {
                    let section = b.sections.len() - 1;
                    b.blocks.push(CodeBlock { info_string: info, body, section, line: start });
                } else {
                    body.push_str(line);
                    body.push('\n');
                    fence = Some((ch, n, info, body, start));
                }
                i += 1;
                continue;
            }

            if let Some((info, mut body, indent, start)) = rst_block.take() {
                let ind = line.len() - line.trim_start().len();
                if line.trim().is_empty() || ind > indent {
                    b.push_line(line);
                    if !line.trim().is_empty() || !body.is_empty() {
                        body.push_str(line.get(indent + 1..).unwrap_or("").trim_start());
                        body.push('\n');
                    }
                    rst_block = Some((info, body, indent, start));
                    i += 1;
                    continue;
                }
                let section = b.sections.len() - 1;
                b.blocks.push(CodeBlock { info_string: info, body: body.trim_end().to_string() + "\n", section, line: start });
            }

            if let Some((ch, n, info)) = fence_open(line) {
                b.push_line(line);
                fence = Some((ch, n, info, String::new(), i));
                i += 1;
                continue;
            }

            if rst {
                let t = line.trim();
                if let Some(rest) = t.strip_prefix(".. code-block::").or_else(|| t.strip_prefix(".. code::")) {
                    b.push_line(line);
                    let indent = line.len() - line.trim_start().len();
                    rst_block = Some((rest.trim().to_string(), String::new(), indent, i));
                    i += 1;
                    continue;
                }
                // overline + title + underline
                if let (Some(over), Some(title), Some(under)) = (rst_adornment(line), lines.get(i + 1), lines.get(i + 2).and_then(|l| rst_adornment(l))) {
                    if over == under && !title.trim().is_empty() && rst_adornment(title).is_none() {
                        let level = rst_level(&mut rst_levels, over, true);
                        b.open_section(level, clean_heading(title), i + 1);
                        i += 3;
                        continue;
                    }
                }
                if !line.trim().is_empty() && rst_adornment(line).is_none() {
                    if let Some(ch) = lines.get(i + 1).and_then(|l| rst_adornment(l)) {
                        if lines[i + 1].trim_end().len() >= line.trim_end().len() {
                            let level = rst_level(&mut rst_levels, ch, false);
                            b.open_section(level, clean_heading(line), i);
                            i += 2;
                            continue;
                        }
                    }
                }
                b.push_line(line);
                i += 1;
                continue;
            }

            if let Some(c) = atx_re().captures(line) {
                let level = c[1].len() as u8;
                let text = c.get(2).map_or("", |m| m.as_str());
                b.open_section(level, clean_heading(text), i);
                i += 1;
                continue;
            }
            if let Some(c) = html_heading_re().captures(line) {
                let level: u8 = c[1].parse().unwrap_or(1);
                b.open_section(level, clean_heading(&c[2]), i);
                i += 1;
                continue;
            }
            if let Some(next) = lines.get(i + 1) {
                let nt = next.trim();
                let setext = if !nt.is_empty() && nt.chars().all(|c| c == '=') {
                    Some(1)
                } else if nt.len() >= 2 && nt.chars().all(|c| c == '-') {
                    Some(2)
                } else {
                    None
                };
                let plain = !line.trim().is_empty()
                    && !line.trim_start().starts_with(['-', '*', '+', '>', '|'])
                    && (line.len() - line.trim_start().len()) < 4;
                let prev_blank = i == 0 || lines[i - 1].trim().is_empty();
                if let (Some(level), true, true) = (setext, plain, prev_blank) {
                    b.open_section(level, clean_heading(line), i);
                    i += 2;
                    continue;
                }
            }
            b.push_line(line);
            i += 1;
        }
        if let Some((_, _, info, body, start)) = fence {
            let section = b.sections.len() - 1;
            b.blocks.push(CodeBlock { info_string: info, body, section, line: start });
        }
        if let Some((info, body, _, start)) = rst_block {
            let section = b.sections.len() - 1;
            b.blocks.push(CodeBlock { info_string: info, body: body.trim_end().to_string() + "\n", section, line: start });
        }
        for s in &mut b.sections {
            s.word_count = word_count(&s.body);
        }
        ReadmeModel {
            path: path.to_string(),
            headings: b.headings,
            sections: b.sections,
            fenced_code_blocks: b.blocks,
            text: text.to_string(),
        }
    }

    pub fn section_title(&self, section: &Section) -> Option<&str> {
        section.heading.map(|h| self.headings[h].text.as_str())
    }

    /// Body of the first section whose heading equals `title` (case-insensitive).
    pub fn section(&self, title: &str) -> Option<&str> {
        self.sections
            .iter()
            .find(|s| self.section_title(s).is_some_and(|t| t.eq_ignore_ascii_case(title)))
            .map(|s| s.body.as_str())
    }

    /// Sections together with their (possibly absent) heading text.
    pub fn titled_sections(&self) -> impl Iterator<Item = (Option<&str>, &Section)> {
        self.sections.iter().map(|s| (self.section_title(s), s))
    }

    pub fn total_words(&self) -> usize {
        self.sections.iter().map(|s| s.word_count).sum()
    }
}

fn rst_level(levels: &mut Vec<char>, ch: char, overline: bool) -> u8 {
    // Overlined styles are distinct from underline-only ones with the same char.
    let key = if overline { ch.to_ascii_uppercase() } else { ch };
    let pos = levels.iter().position(|&c| c == key).unwrap_or_else(|| {
        levels.push(key);
        levels.len() - 1
    });
    (pos + 1).min(6) as u8
}
