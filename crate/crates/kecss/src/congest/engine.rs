use super::message::{word_bits, Budget, Message};
use super::random::SharedRandomness;
use super::trace::RoundTrace;
use crate::error::{Error, Result};
use crate::graph::{EdgeId, VertexId, WeightedMultigraph};

/// One incident edge as seen from a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Port {
    pub edge: EdgeId,
    pub neighbor: VertexId,
}

/// What a node can see while computing a step.
pub struct Ctx<'a> {
    pub node: VertexId,
    pub n: usize,
    pub round: u64,
    pub ports: &'a [Port],
    pub shared: &'a SharedRandomness,
    pub word_bits: u32,
    pub budget: Budget,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    /// Stepped every round.
    Active,
    /// Stepped again only when a message arrives.
    Idle,
    /// Never stepped again; later messages are dropped.
    Halted,
}

#[derive(Clone, Debug)]
pub struct Action {
    pub outbox: Vec<(usize, Message)>,
    pub status: Status,
}

impl Action {
    pub fn idle() -> Self {
        Action { outbox: Vec::new(), status: Status::Idle }
    }

    pub fn halt() -> Self {
        Action { outbox: Vec::new(), status: Status::Halted }
    }

    pub fn send(outbox: Vec<(usize, Message)>, status: Status) -> Self {
        Action { outbox, status }
    }
}

/// Per-node behaviour. Outputs may depend only on the node's own state, the
/// inbox of the current round and the shared randomness.
pub trait NodeProgram: Send {
    fn init(&mut self, ctx: &Ctx) -> Action;
    /// `inbox[p]` holds the message that arrived on port `p`, if any.
    fn on_round(&mut self, ctx: &Ctx, inbox: &[Option<Message>]) -> Action;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SimConfig {
    pub budget: Budget,
    pub max_rounds: u64,
    /// Step nodes on the rayon pool (requires the `parallel` feature).
    pub parallel: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { budget: Budget::default(), max_rounds: 1_000_000, parallel: crate::par::enabled() }
    }
}

/// A network bound to one graph. Successive runs accumulate into one trace.
pub struct Simulator<'g> {
    g: &'g WeightedMultigraph,
    ports: Vec<Vec<Port>>,
    /// For each edge slot: (u, port at u, v, port at v).
    edge_ports: Vec<(VertexId, usize, VertexId, usize)>,
    config: SimConfig,
    shared: SharedRandomness,
    word_bits: u32,
    trace: RoundTrace,
}

impl<'g> Simulator<'g> {
    pub fn new(g: &'g WeightedMultigraph, config: SimConfig, seed: u64) -> Self {
        let mut ports = vec![Vec::new(); g.n()];
        let mut edge_ports = Vec::with_capacity(g.m());
        for e in g.edges() {
            let pu = ports[e.u].len();
            ports[e.u].push(Port { edge: e.id, neighbor: e.v });
            let pv = ports[e.v].len();
            ports[e.v].push(Port { edge: e.id, neighbor: e.u });
            edge_ports.push((e.u, pu, e.v, pv));
        }
        let mut trace = RoundTrace::default();
        trace.budget_words = config.budget.words().unwrap_or(0);
        Simulator { g, ports, edge_ports, config, shared: SharedRandomness::new(seed), word_bits: word_bits(g.n()), trace }
    }

    pub fn graph(&self) -> &'g WeightedMultigraph {
        self.g
    }

    pub fn config(&self) -> SimConfig {
        self.config
    }

    pub fn shared(&self) -> &SharedRandomness {
        &self.shared
    }

    pub fn word_bits(&self) -> u32 {
        self.word_bits
    }

    pub fn ports(&self, v: VertexId) -> &[Port] {
        &self.ports[v]
    }

    /// Port numbers of edge `id` at its two endpoints.
    pub fn edge_ports(&self, id: EdgeId) -> (VertexId, usize, VertexId, usize) {
        let slot = self.g.edges().binary_search_by_key(&id, |e| e.id).expect("edge exists");
        self.edge_ports[slot]
    }

    pub fn port_of(&self, v: VertexId, id: EdgeId) -> Option<usize> {
        let slot = self.g.edges().binary_search_by_key(&id, |e| e.id).ok()?;
        let (a, pa, b, pb) = self.edge_ports[slot];
        if a == v {
            Some(pa)
        } else if b == v {
            Some(pb)
        } else {
            None
        }
    }

    pub fn trace(&self) -> &RoundTrace {
        &self.trace
    }

    pub fn trace_mut(&mut self) -> &mut RoundTrace {
        &mut self.trace
    }

    pub fn into_trace(self) -> RoundTrace {
        self.trace
    }

    pub fn record_oracle(&mut self, what: &str) {
        self.trace.record_oracle(what);
    }

    /// Runs one program instance per node until quiescence. Rounds are added
    /// to the trace under `phase`.
    pub fn run<P: NodeProgram>(&mut self, phase: &str, mut programs: Vec<P>) -> Result<Vec<P>> {
        let n = self.g.n();
        assert_eq!(programs.len(), n, "one program per node");
        let mut status = vec![Status::Active; n];
        let mut inbox: Vec<Vec<Option<Message>>> = self.ports.iter().map(|p| vec![None; p.len()]).collect();
        let mut has_mail = vec![false; n];
        let ports = &self.ports;
        let shared = &self.shared;
        let (wb, budget) = (self.word_bits, self.config.budget);
        let ctx = |node: VertexId, round: u64| Ctx { node, n, round, ports: &ports[node], shared, word_bits: wb, budget };

        let actions: Vec<Action> = step_all(self.config.parallel, &mut programs, |v, p| Some(p.init(&ctx(v, 0))));
        let mut in_flight = route(self.g, &self.ports, &self.edge_ports, self.word_bits, self.config.budget, &mut self.trace, 0, &actions, &mut status, &mut inbox, &mut has_mail)?;
        let mut rounds = 0u64;
        while in_flight || status.contains(&Status::Active) {
            if rounds >= self.config.max_rounds {
                return Err(Error::MaxRounds(self.config.max_rounds));
            }
            rounds += 1;
            let round = rounds;
            let boxes = std::mem::take(&mut inbox);
            let mut bundles: Vec<(&mut P, Vec<Option<Message>>, bool)> = programs
                .iter_mut()
                .zip(boxes)
                .enumerate()
                .map(|(v, (p, b))| {
                    let run = status[v] == Status::Active || (status[v] == Status::Idle && has_mail[v]);
                    (p, b, run)
                })
                .collect();
            let actions: Vec<Action> = step_bundles(self.config.parallel, &mut bundles, |v, p, b| p.on_round(&ctx(v, round), b));
            inbox = self.ports.iter().map(|p| vec![None; p.len()]).collect();
            has_mail.iter_mut().for_each(|x| *x = false);
            in_flight = route(self.g, &self.ports, &self.edge_ports, self.word_bits, self.config.budget, &mut self.trace, round, &actions, &mut status, &mut inbox, &mut has_mail)?;
        }
        self.trace.rounds += rounds;
        self.trace.add_phase(phase, rounds);
        Ok(programs)
    }
}

/// Validates and delivers outboxes in node order. Returns whether any message
/// is now in flight.
#[allow(clippy::too_many_arguments)]
fn route(
    g: &WeightedMultigraph,
    ports: &[Vec<Port>],
    edge_ports: &[(VertexId, usize, VertexId, usize)],
    word_bits: u32,
    budget: Budget,
    trace: &mut RoundTrace,
    round: u64,
    actions: &[Action],
    status: &mut [Status],
    inbox: &mut [Vec<Option<Message>>],
    has_mail: &mut [bool],
) -> Result<bool> {
    let mut any = false;
    for (v, act) in actions.iter().enumerate() {
        let mut used = vec![false; ports[v].len()];
        for (port, msg) in &act.outbox {
            let Some(p) = ports[v].get(*port) else {
                return Err(Error::BadPort { node: v, port: *port });
            };
            if used[*port] {
                return Err(Error::DuplicateSend { node: v, edge: p.edge, round });
            }
            used[*port] = true;
            let words = msg.words(word_bits);
            if !budget.allows(words) {
                return Err(Error::BudgetViolation { node: v, edge: p.edge, round, words, budget: budget.words().unwrap_or(0) });
            }
            trace.words_sent += words;
            trace.messages += 1;
            trace.max_message_words = trace.max_message_words.max(words);
            let w = p.neighbor;
            if status[w] == Status::Halted {
                continue;
            }
            let slot = g.edges().binary_search_by_key(&p.edge, |e| e.id).expect("edge exists");
            let (a, pa, _, pb) = edge_ports[slot];
            let back = if a == v { pb } else { pa };
            inbox[w][back] = Some(msg.clone());
            has_mail[w] = true;
            any = true;
        }
        if status[v] != Status::Halted {
            status[v] = act.status;
        }
    }
    Ok(any)
}

fn step_all<P, F>(parallel: bool, programs: &mut [P], f: F) -> Vec<Action>
where
    P: NodeProgram,
    F: Fn(VertexId, &mut P) -> Option<Action> + Sync + Send,
{
    let run = |(v, p): (usize, &mut P)| f(v, p).unwrap_or_else(Action::idle);
    #[cfg(feature = "parallel")]
    if parallel {
        use rayon::prelude::*;
        return programs.par_iter_mut().enumerate().map(run).collect();
    }
    let _ = parallel;
    programs.iter_mut().enumerate().map(run).collect()
}

fn step_bundles<P, F>(parallel: bool, bundles: &mut [(&mut P, Vec<Option<Message>>, bool)], f: F) -> Vec<Action>
where
    P: NodeProgram,
    F: Fn(VertexId, &mut P, &[Option<Message>]) -> Action + Sync + Send,
{
    let run = |(v, (p, b, go)): (usize, &mut (&mut P, Vec<Option<Message>>, bool))| {
        if *go {
            f(v, p, b)
        } else {
            Action { outbox: Vec::new(), status: Status::Idle }
        }
    };
    #[cfg(feature = "parallel")]
    if parallel && bundles.len() >= 64 {
        use rayon::prelude::*;
        return bundles.par_iter_mut().enumerate().map(run).collect();
    }
    let _ = parallel;
    bundles.iter_mut().enumerate().map(run).collect()
}

/// Runs `programs` on a fresh simulator and returns the final states and trace.
pub fn run<P: NodeProgram>(
    g: &WeightedMultigraph,
    programs: Vec<P>,
    budget: Budget,
    max_rounds: u64,
    seed: u64,
) -> Result<(Vec<P>, RoundTrace)> {
    let mut sim = Simulator::new(g, SimConfig { budget, max_rounds, ..SimConfig::default() }, seed);
    let out = sim.run("run", programs)?;
    Ok((out, sim.into_trace()))
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Halt;
    impl NodeProgram for Halt {
        fn init(&mut self, _: &Ctx) -> Action {
            Action::halt()
        }
        fn on_round(&mut self, _: &Ctx, _: &[Option<Message>]) -> Action {
            Action::halt()
        }
    }

    /// Forwards a token away from where it came from.
    #[derive(Debug)]
    struct Flood {
        has: bool,
        start: bool,
        width: u64,
    }
    impl NodeProgram for Flood {
        fn init(&mut self, ctx: &Ctx) -> Action {
            if self.start {
                self.has = true;
                let out = (0..ctx.ports.len()).map(|p| (p, Message::new(vec![1], self.width))).collect();
                return Action::send(out, Status::Idle);
            }
            Action::idle()
        }
        fn on_round(&mut self, ctx: &Ctx, inbox: &[Option<Message>]) -> Action {
            if self.has {
                return Action::idle();
            }
            self.has = true;
            let out = (0..ctx.ports.len())
                .filter(|&p| inbox[p].is_none())
                .map(|p| (p, Message::new(vec![1], self.width)))
                .collect();
            Action::send(out, Status::Idle)
        }
    }

    fn path(n: usize) -> WeightedMultigraph {
        let t: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1)).collect();
        WeightedMultigraph::from_triples(n, &t).unwrap()
    }

    #[test]
    fn halting_at_init_takes_no_rounds() {
        let g = WeightedMultigraph::new(1, vec![]).unwrap();
        let (_, trace) = run(&g, vec![Halt], Budget::default(), 10, 0).unwrap();
        assert_eq!(trace.rounds, 0);
    }

    #[test]
    fn flooding_a_path_of_length_five() {
        let g = path(6);
        let nodes = (0..6).map(|v| Flood { has: false, start: v == 0, width: 1 }).collect();
        let (out, trace) = run(&g, nodes, Budget::default(), 100, 0).unwrap();
        assert_eq!(trace.rounds, 5);
        assert!(out.iter().all(|f| f.has));
        assert_eq!(trace.messages, 5);
    }

    #[test]
    fn oversized_messages_are_rejected() {
        let g = path(3);
        let nodes = (0..3).map(|v| Flood { has: false, start: v == 1, width: 100 }).collect();
        let err = run(&g, nodes, Budget::Words(4), 100, 0).unwrap_err();
        assert_eq!(err, Error::BudgetViolation { node: 1, edge: 0, round: 0, words: 50, budget: 4 });
        let nodes = (0..3).map(|v| Flood { has: false, start: v == 1, width: 100 }).collect();
        assert!(run(&g, nodes, Budget::Unbounded, 100, 0).is_ok());
    }

    #[derive(Debug)]
    struct Chatter;
    impl NodeProgram for Chatter {
        fn init(&mut self, _: &Ctx) -> Action {
            Action::send(vec![(0, Message::new(vec![], 1))], Status::Active)
        }
        fn on_round(&mut self, _: &Ctx, _: &[Option<Message>]) -> Action {
            Action::send(vec![(0, Message::new(vec![], 1)), (0, Message::new(vec![], 1))], Status::Active)
        }
    }

    #[test]
    fn duplicate_sends_and_runaways_are_errors() {
        let g = path(2);
        let err = run(&g, vec![Chatter, Chatter], Budget::default(), 10, 0).unwrap_err();
        assert_eq!(err, Error::DuplicateSend { node: 0, edge: 0, round: 1 });
        let nodes = (0..6).map(|v| Flood { has: false, start: v == 0, width: 1 }).collect();
        assert_eq!(run(&path(6), nodes, Budget::default(), 3, 0).unwrap_err(), Error::MaxRounds(3));
    }

    #[test]
    fn serial_and_parallel_stepping_agree() {
        let g = path(200);
        let go = |parallel| {
            let mut sim = Simulator::new(&g, SimConfig { parallel, ..SimConfig::default() }, 9);
            let nodes: Vec<Flood> = (0..200).map(|v| Flood { has: false, start: v == 77, width: 3 }).collect();
            sim.run("flood", nodes).unwrap();
            sim.into_trace()
        };
        assert_eq!(go(false), go(true));
    }
}
