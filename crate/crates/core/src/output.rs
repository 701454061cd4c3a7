//! On-disk formats of a run directory.
//!
//! | file            | content                                      |
//! |-----------------|----------------------------------------------|
//! | `episodes.csv`  | one row per (episode, agent)                 |
//! | `summary.txt`   | the five headline metrics per agent          |
//! | `summary.json`  | [`RunSummary`] as JSON                       |
//! | `run_config.txt`| the config in `key = value` form             |

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::trainer::{AgentEpisode, EpisodeRecord, RunSummary};

pub const EPISODES_FILE: &str = "episodes.csv";
pub const SUMMARY_TEXT_FILE: &str = "summary.txt";
pub const SUMMARY_JSON_FILE: &str = "summary.json";
pub const CONFIG_ECHO_FILE: &str = "run_config.txt";
pub const COMPARISON_FILE: &str = "comparison.txt";

pub const CSV_HEADER: &str = "episode,agent,total_reward,steps,success,collisions,epsilon,eta,curiosity";
const CSV_FIELDS: usize = 9;

pub fn format_episodes_csv(records: &[EpisodeRecord]) -> String {
    let mut out = String::with_capacity(64 * (records.len() * 2 + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        for (i, a) in r.agents.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{},{:.6},{},{},{},{:.6},{:.6},{:.6}",
                r.episode,
                i,
                a.total_reward,
                a.steps,
                u8::from(a.success),
                a.collisions,
                a.epsilon,
                a.eta,
                a.curiosity
            );
        }
    }
    out
}

/// Parses `episodes.csv` text. Rows of one episode must be contiguous and
/// list agents in order. `path` only labels errors.
pub fn parse_episodes_csv(text: &str, path: &Path) -> Result<Vec<EpisodeRecord>> {
    let bad = |line: usize, message: String| Error::Data {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == CSV_HEADER => {}
        Some((_, h)) => return Err(bad(1, format!("unexpected header '{h}'"))),
        None => return Err(bad(1, "empty file".into())),
    }
    let mut records: Vec<EpisodeRecord> = Vec::new();
    for (idx, raw) in lines {
        let lineno = idx + 1;
        let line = raw.trim_end();
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != CSV_FIELDS {
            return Err(bad(lineno, format!("expected {CSV_FIELDS} fields, found {}", f.len())));
        }
        fn field<T: std::str::FromStr>(f: &[&str], i: usize, name: &str) -> std::result::Result<T, String> {
            f[i].trim()
                .parse()
                .map_err(|_| format!("invalid {name} '{}'", f[i]))
        }
        let row = (|| -> std::result::Result<(u64, usize, AgentEpisode), String> {
            let success: u8 = field(&f, 4, "success")?;
            if success > 1 {
                return Err(format!("success must be 0 or 1, got {success}"));
            }
            let ep = AgentEpisode {
                total_reward: field(&f, 2, "total_reward")?,
                steps: field(&f, 3, "steps")?,
                success: success == 1,
                collisions: field(&f, 5, "collisions")?,
                epsilon: field(&f, 6, "epsilon")?,
                eta: field(&f, 7, "eta")?,
                curiosity: field(&f, 8, "curiosity")?,
            };
            Ok((field(&f, 0, "episode")?, field(&f, 1, "agent")?, ep))
        })()
        .map_err(|m| bad(lineno, m))?;
        let (episode, agent, ep) = row;
        match records.last_mut() {
            Some(last) if last.episode == episode => {
                if agent != last.agents.len() {
                    return Err(bad(lineno, format!("agent {agent} out of order")));
                }
                last.agents.push(ep);
            }
            _ => {
                if agent != 0 {
                    return Err(bad(lineno, format!("episode {episode} does not start at agent 0")));
                }
                records.push(EpisodeRecord {
                    episode,
                    agents: vec![ep],
                    wall_seconds: 0.0,
                });
            }
        }
    }
    if let Some(n) = records.first().map(|r| r.agents.len()) {
        if let Some(r) = records.iter().find(|r| r.agents.len() != n) {
            return Err(Error::Data {
                path: path.to_path_buf(),
                line: 0,
                message: format!("episode {} has {} agents, expected {n}", r.episode, r.agents.len()),
            });
        }
    }
    Ok(records)
}

pub fn read_episodes_csv(path: &Path) -> Result<Vec<EpisodeRecord>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_episodes_csv(&text, path)
}

/// The headline metrics, one block per agent.
pub fn format_summary_text(summary: &RunSummary) -> String {
    let mut s = String::new();
    for a in &summary.agents {
        let _ = writeln!(s, "Agent {}", a.agent);
        match a.success_rate {
            Some(r) => {
                let _ = writeln!(
                    s,
                    "  Success Rate: {:.1}% ({}/{})",
                    100.0 * r,
                    a.successes,
                    a.episodes
                );
            }
            None => {
                let _ = writeln!(s, "  Success Rate: n/a (0 episodes)");
            }
        }
        let _ = writeln!(s, "  Mean Reward: {:.4} ± {:.4}", a.mean_reward, a.std_reward);
        let _ = writeln!(s, "  Steps to Goal: {:.1}", a.mean_steps);
        let _ = writeln!(s, "  Reward Variance: {:.4}", a.reward_variance);
        let _ = writeln!(s, "  Collision Rate: {:.4}", a.collision_rate);
    }
    let _ = writeln!(s, "Simulation Time: {:.2} s", summary.simulation_seconds);
    s
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

/// Writes every run artifact into `dir`, creating it if needed.
pub fn write_run(dir: &Path, config: &RunConfig, summary: &RunSummary, records: &[EpisodeRecord]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write(&dir.join(EPISODES_FILE), &format_episodes_csv(records))?;
    write(&dir.join(SUMMARY_TEXT_FILE), &format_summary_text(summary))?;
    let json = serde_json::to_string_pretty(summary).map_err(|e| Error::Protocol(e.to_string()))?;
    write(&dir.join(SUMMARY_JSON_FILE), &(json + "\n"))?;
    write(&dir.join(CONFIG_ECHO_FILE), &config.to_kv_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn records() -> Vec<EpisodeRecord> {
        let ep = |r: f64, s: bool| AgentEpisode {
            total_reward: r,
            steps: 12,
            success: s,
            collisions: 1,
            epsilon: 0.995,
            eta: 1.4,
            curiosity: 2.0,
        };
        vec![
            EpisodeRecord { episode: 1, agents: vec![ep(-0.5, false), ep(1.0 / 3.0, true)], wall_seconds: 0.1 },
            EpisodeRecord { episode: 2, agents: vec![ep(8.0, true), ep(-2.25, false)], wall_seconds: 0.1 },
        ]
    }

    #[test]
    fn csv_layout() {
        let text = format_episodes_csv(&records());
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], "1,0,-0.500000,12,0,1,0.995000,1.400000,2.000000");
        assert_eq!(lines[2], "1,1,0.333333,12,1,1,0.995000,1.400000,2.000000");
        assert_eq!(lines.len(), 5);
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn csv_roundtrip_at_printed_precision() {
        let text = format_episodes_csv(&records());
        let back = parse_episodes_csv(&text, Path::new("x.csv")).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(format_episodes_csv(&back), text);
    }

    #[test]
    fn csv_errors_name_the_line() {
        let mut text = format_episodes_csv(&records());
        text.push_str("3,0,abc,1,0,0,1,1,1\n");
        match parse_episodes_csv(&text, Path::new("x.csv")) {
            Err(Error::Data { line, message, .. }) => {
                assert_eq!(line, 6);
                assert!(message.contains("total_reward"));
            }
            other => panic!("{other:?}"),
        }
        let err = parse_episodes_csv("episode,agent\n", Path::new("x.csv")).unwrap_err();
        assert!(matches!(err, Error::Data { line: 1, .. }));
        let err = parse_episodes_csv(&format!("{CSV_HEADER}\n1,1,0,1,0,0,1,1,1\n"), Path::new("x")).unwrap_err();
        assert!(matches!(err, Error::Data { line: 2, .. }));
    }

    #[test]
    fn summary_labels() {
        let s = RunSummary::from_records(&records(), 2);
        let text = format_summary_text(&s);
        for label in ["Success Rate", "Mean Reward", "Steps to Goal", "Reward Variance", "Simulation Time"] {
            assert!(text.contains(label), "{label}");
        }
        assert!(text.contains("Success Rate: 50.0% (1/2)"));
        assert!(text.contains("Mean Reward: 3.7500 ± 4.2500"));
        let empty = format_summary_text(&RunSummary::from_records(&[], 2));
        assert!(empty.contains("n/a"));
    }
}
