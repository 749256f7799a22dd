use super::{BvhError, Channel, Joint, SkeletonAnimation};

/// Whitespace token with the 1-based line it came from.
struct Token<'a> {
    text: &'a str,
    line: usize,
}

struct Tokens<'a> {
    items: Vec<Token<'a>>,
    pos: usize,
}

impl<'a> Tokens<'a> {
    fn new(text: &'a str) -> Self {
        let mut items = Vec::new();
        for (i, line) in text.lines().enumerate() {
            for word in line.split_whitespace() {
                items.push(Token {
                    text: word,
                    line: i + 1,
                });
            }
        }
        Self { items, pos: 0 }
    }

    fn next(&mut self, expected: &'static str) -> Result<&Token<'a>, BvhError> {
        let tok = self
            .items
            .get(self.pos)
            .ok_or(BvhError::UnexpectedEof(expected))?;
        self.pos += 1;
        Ok(tok)
    }

    fn expect(&mut self, literal: &'static str) -> Result<usize, BvhError> {
        let tok = self.next(literal)?;
        if tok.text == literal {
            Ok(tok.line)
        } else {
            Err(BvhError::Unexpected {
                line: tok.line,
                expected: literal,
                found: tok.text.to_string(),
            })
        }
    }

    fn peek_is(&self, literal: &str) -> bool {
        self.items
            .get(self.pos)
            .map(|t| t.text == literal)
            .unwrap_or(false)
    }

    fn number(&mut self, expected: &'static str) -> Result<f64, BvhError> {
        let tok = self.next(expected)?;
        tok.text.parse::<f64>().map_err(|_| BvhError::BadNumber {
            line: tok.line,
            token: tok.text.to_string(),
        })
    }

    fn integer(&mut self, expected: &'static str) -> Result<usize, BvhError> {
        let tok = self.next(expected)?;
        tok.text.parse::<usize>().map_err(|_| BvhError::BadNumber {
            line: tok.line,
            token: tok.text.to_string(),
        })
    }
}

/// Parses a BVH document (HIERARCHY + MOTION sections).
///
/// Joint order, channel order and channel values are preserved exactly as
/// declared. All malformed input is reported with its line number.
pub fn parse_bvh(text: &str) -> Result<SkeletonAnimation, BvhError> {
    let mut tokens = Tokens::new(text);
    tokens.expect("HIERARCHY")?;
    tokens.expect("ROOT")?;

    let mut joints: Vec<Joint> = Vec::new();
    parse_joint(&mut tokens, None, &mut joints)?;

    tokens.expect("MOTION")?;
    tokens.expect("Frames:")?;
    let frame_count = tokens.integer("frame count")?;
    tokens.expect("Frame")?;
    tokens.expect("Time:")?;
    let frame_time = tokens.number("frame time")?;

    let channel_count: usize = joints.iter().map(|j| j.channels.len()).sum();

    // Frame rows are line-oriented: one row per line, arity checked per row.
    let mut frames = Vec::with_capacity(frame_count);
    let mut row = 0usize;
    while row < frame_count {
        let first = tokens.next("frame row")?;
        let line = first.line;
        let mut values = Vec::with_capacity(channel_count);
        values.push(parse_value(first)?);
        while tokens
            .items
            .get(tokens.pos)
            .map(|t| t.line == line)
            .unwrap_or(false)
        {
            let tok = tokens.next("frame value")?;
            values.push(parse_value(tok)?);
        }
        if values.len() != channel_count {
            return Err(BvhError::FrameArity {
                line,
                row: row + 1,
                expected: channel_count,
                found: values.len(),
            });
        }
        frames.push(values);
        row += 1;
    }

    Ok(SkeletonAnimation::from_parts(joints, frames, frame_time))
}

fn parse_value(tok: &Token<'_>) -> Result<f64, BvhError> {
    tok.text.parse::<f64>().map_err(|_| BvhError::BadNumber {
        line: tok.line,
        token: tok.text.to_string(),
    })
}

/// Parses one `ROOT`/`JOINT` body. The keyword itself has already been
/// consumed; this reads the name, braces and children recursively.
fn parse_joint(
    tokens: &mut Tokens<'_>,
    parent: Option<usize>,
    joints: &mut Vec<Joint>,
) -> Result<(), BvhError> {
    let name = tokens.next("joint name")?.text.to_string();
    tokens.expect("{")?;
    tokens.expect("OFFSET")?;
    let offset = [
        tokens.number("offset x")?,
        tokens.number("offset y")?,
        tokens.number("offset z")?,
    ];
    tokens.expect("CHANNELS")?;
    let declared = tokens.integer("channel count")?;
    let mut channels = Vec::with_capacity(declared);
    for _ in 0..declared {
        let tok = tokens.next("channel tag")?;
        let channel = Channel::from_tag(tok.text).ok_or_else(|| BvhError::UnknownChannel {
            line: tok.line,
            tag: tok.text.to_string(),
        })?;
        channels.push(channel);
    }

    let channel_base = joints.iter().map(|j| j.channels.len()).sum();
    let index = joints.len();
    joints.push(Joint {
        name,
        parent,
        offset,
        channels,
        channel_base,
        end_site: None,
    });

    loop {
        if tokens.peek_is("JOINT") {
            tokens.expect("JOINT")?;
            parse_joint(tokens, Some(index), joints)?;
        } else if tokens.peek_is("End") {
            tokens.expect("End")?;
            tokens.expect("Site")?;
            tokens.expect("{")?;
            tokens.expect("OFFSET")?;
            let end = [
                tokens.number("end site x")?,
                tokens.number("end site y")?,
                tokens.number("end site z")?,
            ];
            tokens.expect("}")?;
            joints[index].end_site = Some(end);
        } else if tokens.peek_is("}") {
            tokens.expect("}")?;
            return Ok(());
        } else {
            let tok = tokens.next("JOINT, End Site or }")?;
            return Err(BvhError::Unexpected {
                line: tok.line,
                expected: "JOINT, End Site or }",
                found: tok.text.to_string(),
            });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const MINIMAL: &str = "\
HIERARCHY
ROOT Hips
{
    OFFSET 0.0 0.0 0.0
    CHANNELS 6 Xposition Yposition Zposition Zrotation Yrotation Xrotation
}
MOTION
Frames: 1
Frame Time: 0.033333
0.0 0.0 0.0 0.0 0.0 0.0
";

    pub(crate) const TWO_JOINT: &str = "\
HIERARCHY
ROOT Hips
{
    OFFSET 0.0 0.0 0.0
    CHANNELS 6 Xposition Yposition Zposition Zrotation Yrotation Xrotation
    JOINT Arm
    {
        OFFSET 0.0 1.0 0.0
        CHANNELS 3 Zrotation Yrotation Xrotation
        End Site
        {
            OFFSET 0.0 0.5 0.0
        }
    }
}
MOTION
Frames: 2
Frame Time: 0.033333
0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0 0.0
1.0 2.0 3.0 90.0 0.0 0.0 30.0 0.0 0.0
";

    #[test]
    fn minimal_single_joint() {
        let anim = parse_bvh(MINIMAL).unwrap();
        assert_eq!(anim.joints().len(), 1);
        assert_eq!(anim.frame_count(), 1);
        assert_eq!(anim.channel_count(), 6);
        assert!(anim.frame(0).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn two_joint_chain() {
        let anim = parse_bvh(TWO_JOINT).unwrap();
        assert_eq!(anim.joints().len(), 2);
        assert_eq!(anim.frame_count(), 2);
        let arm = &anim.joints()[1];
        assert_eq!(arm.name, "Arm");
        assert_eq!(arm.parent, Some(0));
        assert_eq!(arm.offset, [0.0, 1.0, 0.0]);
        assert_eq!(arm.channel_base, 6);
        assert_eq!(arm.end_site, Some([0.0, 0.5, 0.0]));
        assert_eq!(anim.frame(1)[6], 30.0);
    }

    #[test]
    fn wrong_arity_names_the_row() {
        let bad = MINIMAL.replace("0.0 0.0 0.0 0.0 0.0 0.0", "0.0 0.0 0.0 0.0 0.0");
        match parse_bvh(&bad) {
            Err(BvhError::FrameArity {
                row,
                expected,
                found,
                ..
            }) => {
                assert_eq!(row, 1);
                assert_eq!(expected, 6);
                assert_eq!(found, 5);
            }
            other => panic!("expected FrameArity, got {other:?}"),
        }
    }

    #[test]
    fn unknown_channel_tag() {
        let bad = MINIMAL.replace("Xrotation", "Wrotation");
        match parse_bvh(&bad) {
            Err(BvhError::UnknownChannel { line, tag }) => {
                assert_eq!(line, 5);
                assert_eq!(tag, "Wrotation");
            }
            other => panic!("expected UnknownChannel, got {other:?}"),
        }
    }

    #[test]
    fn non_numeric_frame_value() {
        let bad = MINIMAL.replace("0.0 0.0 0.0 0.0 0.0 0.0", "0.0 0.0 oops 0.0 0.0 0.0");
        match parse_bvh(&bad) {
            Err(BvhError::BadNumber { line, token }) => {
                assert_eq!(line, 10);
                assert_eq!(token, "oops");
            }
            other => panic!("expected BadNumber, got {other:?}"),
        }
    }

    #[test]
    fn malformed_header() {
        match parse_bvh("NOTBVH\n") {
            Err(BvhError::Unexpected { line, expected, .. }) => {
                assert_eq!(line, 1);
                assert_eq!(expected, "HIERARCHY");
            }
            other => panic!("expected Unexpected, got {other:?}"),
        }
    }
}
