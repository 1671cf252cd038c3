//! Parser for the Pegasus DAX XML subset: `<job>` elements with `uses`
//! file declarations and `<child>/<parent>` dependency links. Anything
//! else in the document is ignored.

use std::collections::BTreeMap;

use quick_xml::events::{BytesStart, Event};
use quick_xml::Reader;

use crate::workflow::{EdgeSpec, Task, WorkflowDag};

use super::IngestError;

const BYTES_PER_MB: f64 = 1e6;

#[derive(Debug, Default)]
struct Job {
    runtime_s: f64,
    inputs: Vec<(String, f64)>,
    outputs: Vec<(String, f64)>,
}

/// Parses DAX bytes into a workflow. Job runtimes convert to millions of
/// instructions through `reference_mips`; edge data sizes come from the
/// files a parent writes and its child reads.
pub fn parse_dax(bytes: &[u8], reference_mips: f64) -> Result<WorkflowDag, IngestError> {
    let mut reader = Reader::from_reader(bytes);
    reader.config_mut().trim_text(true);

    let mut jobs: BTreeMap<String, Job> = BTreeMap::new();
    let mut job_order: Vec<String> = Vec::new();
    let mut deps: Vec<(String, String)> = Vec::new(); // (parent, child)
    let mut current_job: Option<String> = None;
    let mut current_child: Option<String> = None;
    let mut buf = Vec::new();

    loop {
        let position = reader.buffer_position();
        let event = reader
            .read_event_into(&mut buf)
            .map_err(|e| IngestError::Xml {
                position,
                reason: e.to_string(),
            })?;
        match event {
            Event::Start(ref e) | Event::Empty(ref e) => {
                let is_empty = matches!(event, Event::Empty(_));
                match e.name().as_ref() {
                    b"job" => {
                        let id = attr(&reader, e, "id", position)?.ok_or(IngestError::Xml {
                            position,
                            reason: "job without id".into(),
                        })?;
                        let runtime: f64 = attr(&reader, e, "runtime", position)?
                            .unwrap_or_default()
                            .parse()
                            .map_err(|_| IngestError::Xml {
                                position,
                                reason: format!("job `{id}` has a malformed runtime"),
                            })?;
                        if jobs.contains_key(&id) {
                            return Err(IngestError::DuplicateJob(id));
                        }
                        if runtime <= 0.0 {
                            return Err(IngestError::NonPositiveRuntime { id, runtime });
                        }
                        jobs.insert(
                            id.clone(),
                            Job {
                                runtime_s: runtime,
                                ..Job::default()
                            },
                        );
                        job_order.push(id.clone());
                        if !is_empty {
                            current_job = Some(id);
                        }
                    }
                    b"uses" => {
                        if let Some(job_id) = &current_job {
                            let file = attr(&reader, e, "file", position)?
                                .or(attr(&reader, e, "name", position)?)
                                .unwrap_or_default();
                            let link = attr(&reader, e, "link", position)?.unwrap_or_default();
                            let size: f64 = attr(&reader, e, "size", position)?
                                .unwrap_or_else(|| "0".into())
                                .parse()
                                .unwrap_or(0.0);
                            let job = jobs.get_mut(job_id).expect("current job exists");
                            match link.as_str() {
                                "input" => job.inputs.push((file, size)),
                                "output" => job.outputs.push((file, size)),
                                _ => {}
                            }
                        }
                    }
                    b"child" => {
                        let id = attr(&reader, e, "ref", position)?.ok_or(IngestError::Xml {
                            position,
                            reason: "child without ref".into(),
                        })?;
                        if !is_empty {
                            current_child = Some(id);
                        }
                    }
                    b"parent" => {
                        if let Some(child) = &current_child {
                            let id =
                                attr(&reader, e, "ref", position)?.ok_or(IngestError::Xml {
                                    position,
                                    reason: "parent without ref".into(),
                                })?;
                            deps.push((id, child.clone()));
                        }
                    }
                    _ => {}
                }
            }
            Event::End(ref e) => match e.name().as_ref() {
                b"job" => current_job = None,
                b"child" => current_child = None,
                _ => {}
            },
            Event::Eof => break,
            _ => {}
        }
        buf.clear();
    }

    for (parent, child) in &deps {
        for id in [parent, child] {
            if !jobs.contains_key(id.as_str()) {
                return Err(IngestError::UnknownJob(id.clone()));
            }
        }
    }

    let tasks: Vec<Task> = job_order
        .iter()
        .map(|id| Task {
            id: id.clone(),
            weight_mi: jobs[id].runtime_s * reference_mips,
        })
        .collect();
    let edges: Vec<EdgeSpec> = deps
        .iter()
        .map(|(parent, child)| {
            // Bytes shipped: files the parent writes that the child reads.
            let bytes: f64 = jobs[parent]
                .outputs
                .iter()
                .filter(|(f, _)| jobs[child].inputs.iter().any(|(g, _)| g == f))
                .map(|&(_, size)| size)
                .sum();
            EdgeSpec {
                from: parent.clone(),
                to: child.clone(),
                data_mb: bytes / BYTES_PER_MB,
            }
        })
        .collect();
    let dag = WorkflowDag::new(tasks, edges);
    let violations = dag.validate();
    if violations.is_empty() {
        Ok(dag)
    } else {
        Err(IngestError::InvalidWorkflow(
            violations
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join("; "),
        ))
    }
}

fn attr(
    reader: &Reader<&[u8]>,
    e: &BytesStart,
    name: &str,
    position: u64,
) -> Result<Option<String>, IngestError> {
    for a in e.attributes() {
        let a = a.map_err(|err| IngestError::Xml {
            position,
            reason: err.to_string(),
        })?;
        if a.key.as_ref() == name.as_bytes() {
            let v = a
                .decoded_and_normalized_value(quick_xml::XmlVersion::default(), reader.decoder())
                .map_err(|err| IngestError::Xml {
                    position,
                    reason: err.to_string(),
                })?;
            return Ok(Some(v.into_owned()));
        }
    }
    Ok(None)
}
