use super::Instance;

fn ext(v: Option<i64>, infinite: &str) -> String {
    v.map_or_else(|| infinite.to_string(), |x| x.to_string())
}

/// Writes an instance back to the fact format. Output order is fixed:
/// trains, then edges in lexicographic order, then network and objective facts.
pub fn serialize_instance(inst: &Instance) -> String {
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };

    for t in &inst.trains {
        line(format!("tl({}).", t.id));
    }
    for t in &inst.trains {
        for e in &t.edges {
            line(format!("edge({},{},{}).", t.id, e.from, e.to));
        }
        for e in &t.edges {
            line(format!("w({},{},{}).", t.id, e, t.wait_time(e)));
        }
        for v in &t.nodes {
            line(format!(
                "e({},{},{}). l({},{},{}).",
                t.id,
                v,
                t.earliest(v),
                t.id,
                v,
                ext(t.latest(v), "#sup")
            ));
        }
        for v in &t.starts {
            line(format!("start({},{}).", t.id, v));
        }
        for v in &t.ends {
            line(format!("end({},{}).", t.id, v));
        }
    }
    for (e, m) in &inst.network.travel {
        line(format!("m({e},{m})."));
    }
    for (r, edges) in &inst.network.resources {
        for e in edges {
            line(format!("resource({r},{e})."));
        }
        line(format!("b({},{}).", r, inst.network.blocked_time(r)));
    }
    for c in &inst.connections {
        line(format!(
            "connection({},{},{},{},{},{},{},{},{}).",
            c.id,
            c.train,
            c.edge,
            c.other_train,
            c.other_edge,
            ext(c.alpha, "#inf"),
            ext(c.omega, "#inf"),
            c.node,
            c.other_node
        ));
    }
    for p in &inst.free_points {
        line(format!(
            "free({},{},{},{},{},{}).",
            p.connection, p.train, p.edge, p.other_train, p.other_edge, p.resource
        ));
    }
    for ((t, v), ths) in &inst.objective.thresholds {
        for th in ths {
            line(format!("potlate({t},{v},{},{}).", th.at, th.weight));
        }
    }
    for (e, p) in &inst.objective.route_penalty {
        line(format!("penalty({e},{p})."));
    }
    if let Some(pre) = &inst.precomputed {
        for ((t, r, a), edges) in &pre.areas {
            for e in edges {
                line(format!("ra({t},{r},{a},{e})."));
            }
        }
        for ((t, r, a), x) in &pre.entry {
            line(format!("e_ra({t},{r},{a},{x})."));
        }
        for ((t, r, a), x) in &pre.exit {
            line(format!("l_ra({t},{r},{a},{}).", ext(*x, "#sup")));
        }
        for (t, edges) in &pre.mandatory {
            for e in edges {
                line(format!("set({t},{e})."));
            }
        }
    }
    out
}
