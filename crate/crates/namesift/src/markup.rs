//! Minimal HTML-to-text pass: drops tags, comments and the bodies of
//! `script`/`style`, then decodes character references.

const NAMED: &[(&str, char)] = &[
    ("amp", '&'),
    ("apos", '\''),
    ("copy", '©'),
    ("gt", '>'),
    ("hellip", '…'),
    ("laquo", '«'),
    ("ldquo", '“'),
    ("lsquo", '‘'),
    ("lt", '<'),
    ("mdash", '—'),
    ("nbsp", ' '),
    ("ndash", '–'),
    ("quot", '"'),
    ("raquo", '»'),
    ("rdquo", '”'),
    ("reg", '®'),
    ("rsquo", '’'),
];

/// Tags are replaced by a space so that adjacent words stay separate.
pub fn strip_markup(html: &str) -> String {
    let mut text = String::with_capacity(html.len());
    let lower = html.to_ascii_lowercase();
    let mut i = 0;
    while i < html.len() {
        let rest = &html[i..];
        if !rest.starts_with('<') {
            let next = rest.find('<').map_or(html.len(), |p| i + p);
            text.push_str(&html[i..next]);
            i = next;
            continue;
        }
        if lower[i..].starts_with("<!--") {
            i = lower[i + 4..]
                .find("-->")
                .map_or(html.len(), |p| i + 4 + p + 3);
        } else if let Some(tag) = ["script", "style"]
            .into_iter()
            .find(|t| opens(&lower[i + 1..], t))
        {
            let close = format!("</{tag}");
            i = match lower[i..].find(&close) {
                Some(p) => skip_tag(&lower, i + p),
                None => html.len(),
            };
        } else {
            i = skip_tag(&lower, i);
        }
        text.push(' ');
    }
    decode_entities(&text)
}

fn opens(after_lt: &str, tag: &str) -> bool {
    after_lt.starts_with(tag)
        && after_lt[tag.len()..]
            .chars()
            .next()
            .is_none_or(|c| c == '>' || c == '/' || c.is_whitespace())
}

fn skip_tag(s: &str, start: usize) -> usize {
    s[start..].find('>').map_or(s.len(), |p| start + p + 1)
}

/// Decodes named, decimal and hex character references; unknown ones are kept
/// verbatim.
pub fn decode_entities(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut rest = s;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        rest = &rest[amp..];
        let decoded = rest[1..]
            .find(';')
            .filter(|&end| end <= 10)
            .and_then(|end| decode_one(&rest[1..1 + end]).map(|c| (c, end + 2)));
        match decoded {
            Some((c, len)) => {
                out.push(c);
                rest = &rest[len..];
            }
            None => {
                out.push('&');
                rest = &rest[1..];
            }
        }
    }
    out.push_str(rest);
    out
}

fn decode_one(name: &str) -> Option<char> {
    if let Some(num) = name.strip_prefix('#') {
        let code = match num.strip_prefix(['x', 'X']) {
            Some(hex) => u32::from_str_radix(hex, 16).ok()?,
            None => num.parse().ok()?,
        };
        return char::from_u32(code);
    }
    NAMED
        .binary_search_by(|(n, _)| n.cmp(&name))
        .ok()
        .map(|i| NAMED[i].1)
}
