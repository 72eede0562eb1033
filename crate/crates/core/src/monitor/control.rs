use std::fmt;

/// Environment variable through which the wrapped process finds the control file.
pub const CONTROL_ENV: &str = "YPROV_CONTROL";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DirectiveKind {
    Input,
    Output,
    Untrack,
    EndRun,
}

impl DirectiveKind {
    pub fn verb(self) -> &'static str {
        match self {
            DirectiveKind::Input => "INPUT",
            DirectiveKind::Output => "OUTPUT",
            DirectiveKind::Untrack => "UNTRACK",
            DirectiveKind::EndRun => "END_RUN",
        }
    }

    fn from_verb(verb: &str) -> Option<Self> {
        match verb {
            "INPUT" => Some(DirectiveKind::Input),
            "OUTPUT" => Some(DirectiveKind::Output),
            "UNTRACK" => Some(DirectiveKind::Untrack),
            "END_RUN" => Some(DirectiveKind::EndRun),
            _ => None,
        }
    }
}

/// One line of the control channel. `path` is empty for `EndRun`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlDirective {
    pub kind: DirectiveKind,
    pub path: String,
    pub run_name: Option<String>,
    pub seq: u64,
}

impl ControlDirective {
    /// The canonical `VERB<TAB>ARG` form, without the trailing LF.
    pub fn to_line(&self) -> String {
        match (self.kind, &self.run_name) {
            (DirectiveKind::EndRun, Some(name)) => format!("END_RUN\t{name}"),
            (DirectiveKind::EndRun, None) => "END_RUN".to_string(),
            (kind, _) => format!("{}\t{}", kind.verb(), self.path),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub struct ControlError {
    /// 1-based.
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ControlError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "control channel line {}: {}", self.line, self.message)
    }
}

/// Parses control-channel lines (`VERB<TAB>ARG`). Blank lines are skipped
/// but still count toward `seq`, which is the 0-based line index.
pub fn parse_control_stream<I, S>(lines: I) -> Result<Vec<ControlDirective>, ControlError>
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut out = Vec::new();
    for (index, line) in lines.into_iter().enumerate() {
        let line = line.as_ref();
        let line = line.strip_suffix('\n').unwrap_or(line);
        if line.is_empty() {
            continue;
        }
        let err = |message: String| ControlError {
            line: index + 1,
            message,
        };
        let (verb, arg) = match line.split_once('\t') {
            Some((verb, arg)) => (verb, Some(arg)),
            None => (line, None),
        };
        let kind = DirectiveKind::from_verb(verb).ok_or_else(|| err(format!("unknown verb {verb:?}")))?;
        let seq = index as u64;
        let directive = match kind {
            DirectiveKind::EndRun => ControlDirective {
                kind,
                path: String::new(),
                run_name: arg.filter(|a| !a.is_empty()).map(str::to_string),
                seq,
            },
            _ => {
                let path = arg
                    .filter(|a| !a.is_empty())
                    .ok_or_else(|| err(format!("{verb} requires a path argument")))?;
                ControlDirective {
                    kind,
                    path: path.to_string(),
                    run_name: None,
                    seq,
                }
            }
        };
        out.push(directive);
    }
    Ok(out)
}
