use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Independent random streams derived from one master seed. Each label maps
/// to a fixed ChaCha stream id, so adding a consumer to one stream never
/// shifts another.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Fleet = 1,
    TrainWorkload = 2,
    EvalWorkload = 3,
    ActorInit = 4,
    CriticInit = 5,
    Replay = 6,
    Diffusion = 7,
    Exploration = 8,
    EvalNoise = 9,
    Policy = 10,
    Trace = 11,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeedStreams {
    pub master: u64,
}

impl SeedStreams {
    pub fn new(master: u64) -> Self {
        SeedStreams { master }
    }

    pub fn rng(&self, stream: Stream) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master);
        rng.set_stream(stream as u64);
        rng
    }
}
